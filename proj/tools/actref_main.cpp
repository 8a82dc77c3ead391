#include "actref/cli_report.hpp"

#include <iostream>

int main(int argc, char** argv) { return actref::run_cli(argc, argv, std::cout, std::cerr); }
