import csv
import io

DEFAULT_HEADER = ("name", "value")


class ReportFormatter:
    def __init__(self, rows):
        self.rows = rows

    def to_csv(self, delimiter=","):
        buf = io.StringIO()
        writer = csv.writer(buf, delimiter=delimiter)
        for row in self.rows:
            writer.writerow(row)
        return buf.getvalue()

    def to_markdown(self, header):
        lines = ["| " + " | ".join(header) + " |"]
        lines.append("|" + "---|" * len(header))
        for row in self.rows:
            lines.append("| " + " | ".join(str(c) for c in row) + " |")
        return "\n".join(lines)


def describe_header(header=DEFAULT_HEADER):
    return ", ".join(h.upper() for h in header)
