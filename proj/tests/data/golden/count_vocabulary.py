"""Word counts for the bundled fixture, written without reference to the C++ code.

Handles only the LaTeX constructs the fixture generator emits.
Usage: python3 count_vocabulary.py ../fixture/manifest.tsv 3 > vocabulary.tsv
"""
import collections
import pathlib
import re
import sys


def plain(text):
    text = re.sub(r"(?<!\\)%[^\n]*\n?[ \t]*", "", text)
    text = text.split("\\begin{document}", 1)[1].split("\\end{document}", 1)[0]
    text = re.sub(r"\\begin\{equation\}.*?\\end\{equation\}", " ", text, flags=re.S)
    text = re.sub(r"\$[^$]*\$", " ", text)
    text = re.sub(r"\\(cite|label|bibliography)\{[^}]*\}", " ", text)
    text = re.sub(r"\\(emph|section)\{([^}]*)\}", r"\2", text)
    return text.replace("~", " ")


def main():
    manifest = pathlib.Path(sys.argv[1])
    min_count = int(sys.argv[2])
    counts = collections.Counter()
    for line in manifest.read_text().splitlines():
        if not line or line.startswith("#"):
            continue
        fields = line.split("\t")
        body = (manifest.parent / fields[3]).read_text()
        counts.update(re.findall(r"[a-z]+", plain(body).lower()))
    kept = [(w, c) for w, c in counts.items() if c >= min_count]
    kept.sort(key=lambda wc: (-wc[1], wc[0]))
    for w, c in kept:
        print(f"{w}\t{c}")


main()
