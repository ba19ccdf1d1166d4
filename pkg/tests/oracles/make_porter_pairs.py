"""Freeze Porter stemmer reference pairs from NLTK's original-algorithm mode.

Run from the repository root: ``python3 tests/oracles/make_porter_pairs.py``.
The word list combines classic stemmer test words with every alphabetic
token of length > 2 from the domain vocabulary file next to this script.
"""

import json
import re
from pathlib import Path

from nltk.stem.porter import PorterStemmer

CLASSIC = """
caresses ponies ties caress cats feed agreed plastered bled motoring sing
conflated troubled sized hopping tanned falling hissing fizzed failing filing
happy sky relational conditional rational valenci hesitanci digitizer
conformabli radicalli differentli vileli analogousli vietnamization
predication operator feudalism decisiveness hopefulness callousness
formaliti sensitiviti sensibiliti triplicate formative formalize electriciti
electrical hopeful goodness revival allowance inference airliner gyroscopic
adjustable defensible irritant replacement adjustment dependent adoption
homologou communism activate angulariti homologous effective bowdlerize
probate rate cease controll roll generalizations oscillators
""".split()


def main():
    here = Path(__file__).resolve().parent
    domain = re.findall(r"[a-z]+", (here / "domain_words.txt").read_text().lower())
    words = sorted({w for w in CLASSIC + domain if len(w) > 2})
    stemmer = PorterStemmer(mode=PorterStemmer.ORIGINAL_ALGORITHM)
    pairs = {w: stemmer.stem(w) for w in words}
    out = here.parent / "data" / "porter_pairs.json"
    out.write_text(json.dumps(pairs, indent=0, sort_keys=True) + "\n")
    print(f"wrote {len(pairs)} pairs to {out}")


if __name__ == "__main__":
    main()
