"""Finding the reference section of a plain-text document.

Run:  python demos/07_extract_references.py
"""

from citeforge import NoReferenceSection, extract_references

body = (
    "Plain text of a paper goes on for a while before anything resembling "
    "a bibliography shows up. " * 30
)

document = body + """
References
[1] Keane B, Nolan T. 2011. Chunked streaming pipelines. Journal of
    Documentation. 12(3):45-61
[2] Walsh L. 2008. Robust tokenization for noisy metadata. Pattern
    Recognition Letters. 9(1):1-9
[3] Doyle J, Byrne A. 2015. Adaptive sequence labeling at scale.
"""

block = extract_references(document)
position = block.section_start / len(document)
print(f"section label found at {position:.0%} of the document")
for i, ref in enumerate(block.reference_strings, 1):
    print(f"  ref {i}: {ref}")

# A label in the first 40% of a document is a table of contents or a
# running head, not the bibliography; it is rejected.
early = "References\n[1] Too early to be real.\n" + body
try:
    extract_references(early)
except NoReferenceSection as exc:
    print(f"\nearly label rejected: {exc}")
