"""Parsing messy BibTeX, validating entries, and cleaning a corpus.

Run:  python demos/01_parse_and_clean.py
"""

import random

from citeforge import CleanPolicy, clean_corpus, field_histogram, parse_bibtex, serialize, type_histogram, validate_entry
from citeforge.synth import homepage_misc_entry, random_bibtex_file

# A noisy file: mixed-case types, quoted and braced values, stray comments,
# erratic whitespace. Real exports look like this.
rng = random.Random(7)
text = random_bibtex_file(rng, 5)
print("--- raw input (first 400 chars) ---")
print(text[:400])

entries, issues = parse_bibtex(text, source_tag="demo")
print(f"parsed {len(entries)} entries with {len(issues)} parse issues")

# A malformed block never takes the rest of the file down with it.
broken = text + "\n@article{oops, title = {never closed\n" + "@misc{fine, note={ok}}"
recovered, problems = parse_bibtex(broken)
print(f"with a broken block injected: {len(recovered)} entries, "
      f"{len(problems)} issue(s): {problems[0].detail}")

# Validation checks the required fields for each entry type.
for entry in entries[:3]:
    found = validate_entry(entry)
    verdict = "ok" if not found else "; ".join(f"{i.kind.value}: {i.detail}" for i in found)
    print(f"  {entry.entry_type:<14} {entry.key:<28} {verdict}")

# DBLP-style homepage stubs are @misc entries with no title or year. The
# cleaner drops them and can strip fields wholesale (a field carrying
# markup that confuses downstream tools, say).
corpus = entries + [homepage_misc_entry(rng) for _ in range(3)]
cleaned, stats = clean_corpus(corpus, CleanPolicy(fields_to_strip=("month",)))
print(f"cleaned: kept {len(cleaned)} of {len(corpus)}, dropped {stats.dropped} "
      f"({dict(stats.dropped_by_reason)})")

# Corpus statistics: how many entries carry each field / type.
print("field histogram:", field_histogram(cleaned))
print("type histogram: ", type_histogram(cleaned))

# The canonical serialization round-trips through the parser unchanged.
canonical = serialize(cleaned)
assert parse_bibtex(canonical)[0] == cleaned
print("--- canonical form of the first entry ---")
print(canonical.split("\n\n")[0])
