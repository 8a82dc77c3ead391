#include "actref/git_ingest.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

namespace actref {

std::string_view to_string(GitErrorKind kind) {
    switch (kind) {
    case GitErrorKind::RepoNotFound:
        return "RepoNotFound";
    case GitErrorKind::BadRevision:
        return "BadRevision";
    case GitErrorKind::CommitNotFound:
        return "CommitNotFound";
    case GitErrorKind::MultipleParents:
        return "MultipleParents";
    case GitErrorKind::CommandFailed:
        return "CommandFailed";
    }
    return "?";
}

GitError::GitError(GitErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

namespace {

struct RunResult {
    int status = -1;
    std::string out;
};

// git -C repo args..., stdout captured, stderr discarded.
RunResult git(const std::string& repo, std::vector<std::string> args) {
    args.insert(args.begin(), {"git", "-C", repo});
    std::vector<char*> argv;
    for (auto& a : args)
        argv.push_back(a.data());
    argv.push_back(nullptr);

    int fd[2];
    if (pipe(fd) != 0)
        throw GitError(GitErrorKind::CommandFailed, "pipe");
    pid_t pid = fork();
    if (pid < 0)
        throw GitError(GitErrorKind::CommandFailed, "fork");
    if (pid == 0) {
        dup2(fd[1], STDOUT_FILENO);
        close(fd[0]);
        close(fd[1]);
        FILE* devnull = std::fopen("/dev/null", "w");
        if (devnull)
            dup2(fileno(devnull), STDERR_FILENO);
        execvp("git", argv.data());
        _exit(127);
    }
    close(fd[1]);
    RunResult r;
    char buf[65536];
    ssize_t n;
    while ((n = read(fd[0], buf, sizeof buf)) > 0)
        r.out.append(buf, static_cast<std::size_t>(n));
    close(fd[0]);
    int st = 0;
    waitpid(pid, &st, 0);
    r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string l;
    while (std::getline(in, l))
        if (!l.empty())
            out.push_back(l);
    return out;
}

void check_repo(const std::string& repo) {
    if (!std::filesystem::is_directory(repo) || git(repo, {"rev-parse", "--git-dir"}).status != 0)
        throw GitError(GitErrorKind::RepoNotFound, repo);
}

std::string resolve(const std::string& repo, const std::string& rev, GitErrorKind on_error) {
    auto r = git(repo, {"rev-parse", "--verify", "--quiet", rev + "^{commit}"});
    auto l = lines(r.out);
    if (r.status != 0 || l.empty())
        throw GitError(on_error, rev);
    return l.front();
}

std::vector<std::string> parents_of(const std::string& repo, const std::string& full) {
    auto l = lines(git(repo, {"rev-list", "--parents", "-n", "1", full}).out);
    std::istringstream in(l.empty() ? std::string() : l.front());
    std::vector<std::string> out;
    std::string h;
    in >> h;
    while (in >> h)
        out.push_back(h);
    return out;
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

} // namespace

std::vector<std::string> enumerate_commits(const std::string& repo, const std::string& selection,
                                           const IngestOptions& options) {
    check_repo(repo);
    std::vector<std::string> args{"rev-list", "--topo-order", "--reverse"};
    if (!options.include_merges)
        args.push_back("--no-merges");

    if (selection == "all") {
        if (git(repo, {"rev-parse", "--verify", "--quiet", "HEAD"}).status != 0)
            return {};
        args.push_back("--all");
    } else if (!selection.empty() && selection[0] == '@') {
        std::ifstream in(selection.substr(1));
        if (!in)
            throw GitError(GitErrorKind::BadRevision, "cannot read " + selection.substr(1));
        std::ostringstream ss;
        ss << in.rdbuf();
        std::vector<std::string> out;
        for (const std::string& l : lines(ss.str())) {
            std::string rev = l.substr(0, l.find_first_of(" \t#"));
            if (rev.empty())
                continue;
            std::string full = resolve(repo, rev, GitErrorKind::BadRevision);
            if (!options.include_merges && parents_of(repo, full).size() > 1)
                continue;
            if (std::find(out.begin(), out.end(), full) == out.end())
                out.push_back(full);
        }
        if (out.size() < 2)
            return out;
        // listed commits follow history order, not file order
        std::vector<std::string> walk{"rev-list", "--topo-order", "--reverse"};
        walk.insert(walk.end(), out.begin(), out.end());
        std::vector<std::string> sorted;
        for (const std::string& h : lines(git(repo, walk).out))
            if (std::find(out.begin(), out.end(), h) != out.end())
                sorted.push_back(h);
        return sorted;
    } else if (selection.find("..") != std::string::npos) {
        args.push_back(selection);
    } else {
        std::string full = resolve(repo, selection, GitErrorKind::BadRevision);
        args.push_back("-n");
        args.push_back("1");
        args.push_back(full);
        auto r = git(repo, args);
        return lines(r.out);
    }
    auto r = git(repo, args);
    if (r.status != 0)
        throw GitError(GitErrorKind::BadRevision, selection);
    return lines(r.out);
}

CommitFileSets commit_filesets(const std::string& repo, const std::string& commit, const IngestOptions& options) {
    check_repo(repo);
    CommitFileSets out;
    out.commit = resolve(repo, commit, GitErrorKind::CommitNotFound);
    std::vector<std::string> parents = parents_of(repo, out.commit);
    if (parents.size() > 1 && !options.include_merges)
        throw GitError(GitErrorKind::MultipleParents, out.commit);
    if (!parents.empty())
        out.parent = parents.front();

    std::vector<std::string> args{"diff-tree", "-r", "--no-renames", "--no-commit-id", "--name-status", "-z"};
    if (out.parent.empty())
        args.push_back("--root");
    else
        args.push_back(out.parent);
    args.push_back(out.commit);
    auto r = git(repo, args);
    if (r.status != 0)
        throw GitError(GitErrorKind::CommandFailed, "diff-tree " + out.commit);

    std::vector<std::string> fields;
    for (std::size_t p = 0; p < r.out.size();) {
        std::size_t z = r.out.find('\0', p);
        if (z == std::string::npos)
            z = r.out.size();
        fields.push_back(r.out.substr(p, z - p));
        p = z + 1;
    }
    auto blob = [&](const std::string& rev, const std::string& path, std::vector<SourceFile>& into) {
        auto b = git(repo, {"cat-file", "blob", rev + ":" + path});
        if (b.status != 0) {
            out.diagnostics.push_back({path, "cannot read blob at " + rev});
            return;
        }
        if (b.out.size() > options.max_file_bytes) {
            out.diagnostics.push_back({path, "skipped: " + std::to_string(b.out.size()) + " bytes"});
            return;
        }
        into.emplace_back(path, std::move(b.out));
    };
    for (std::size_t i = 0; i + 1 < fields.size(); i += 2) {
        const std::string& status = fields[i];
        const std::string& path = fields[i + 1];
        if (!ends_with(path, options.source_suffix))
            continue;
        char s = status.empty() ? 'M' : status[0];
        if (s != 'A')
            blob(out.parent, path, out.before_set);
        if (s != 'D')
            blob(out.commit, path, out.after_set);
    }
    auto by_path = [](const SourceFile& a, const SourceFile& b) { return a.path < b.path; };
    std::sort(out.before_set.begin(), out.before_set.end(), by_path);
    std::sort(out.after_set.begin(), out.after_set.end(), by_path);
    return out;
}

} // namespace actref
