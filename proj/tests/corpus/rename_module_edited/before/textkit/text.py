import re
import textwrap


class Tokenizer:
    pattern = re.compile(r"[A-Za-z0-9']+")

    def __init__(self, lowercase=True):
        self.lowercase = lowercase

    def tokens(self, text):
        words = self.pattern.findall(text)
        return [w.lower() for w in words] if self.lowercase else words


def slugify(text):
    cleaned = re.sub(r"[^a-z0-9]+", "-", text.lower())
    return cleaned.strip("-")


def wrap(text, width=72):
    return "\n".join(textwrap.wrap(text, width=width))
