"""Regenerate fixtures/qa_dataset.jsonl from the fixture corpus.

Reference answers for the exact records are constructed from the corpus
by formula (the stub generator's output shape) after verifying with a
brute-force cosine scan that the intended chunk really ranks first for
the question. Run from the repository root:

    python3 tools/make_qa_dataset.py
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from statrag import (EmbedderKind, EmbedderSpec, LocalHashEmbedder, SENTINEL,
                     chunk_corpus, cosine, load_adjacency, load_corpus, route)

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
THRESHOLD = 0.25

AL = "Alabama/Digital Crime Act"
KS = "Kansas"
OH = "Ohio/Data Breach Notification Act"
OK = "Oklahoma/Data Breach Notification Act"


def chunk_ref(doc: str) -> str:
    return doc + ".txt#0"


# mode: wdi (exact, whole-index), swi (exact, per-state), prose (hand
# reference), nf_wdi / nf_swi (not-found). gold pins the intended chunk;
# swi gold maps state -> chunk id, None meaning "derive from the scan".
RECORDS = [
    # -- whole-index questions with exact references -----------------------
    ("qa001", "wdi", "What does the term identification documents mean under Code of Ala. 13A-8-111?",
     chunk_ref(f"{AL}/13A-8-111"), []),
    ("qa002", "wdi", "Which crime is defined by Code of Ala. 13A-8-112 and how is it classified?",
     chunk_ref(f"{AL}/13A-8-112"), []),
    ("qa003", "wdi", "Under Ala. Code 8-38-5, how quickly must affected individuals be notified after a breach determination?",
     chunk_ref("Alabama/Data Breach Notification Act/8-38-5"), []),
    ("qa004", "wdi", "What conduct is a severity level 7 nonperson felony under K.S.A. 21-5839?",
     chunk_ref(f"{KS}/Digital Crime Act/21-5839"), []),
    ("qa005", "wdi", "What must a holder of personal information do under K.S.A. 50-7a02 after becoming aware of a security breach?",
     chunk_ref(f"{KS}/Data Breach Notification Act/50-7a02"), []),
    ("qa006", "wdi", "Under Rev. Code 1349.19, is disclosure required not later than forty five days following discovery of the breach?",
     chunk_ref(f"{OH}/1349-19"), []),
    ("qa007", "wdi", "What civil penalty may be imposed under section 1349.192 for failing to give required notice?",
     chunk_ref(f"{OH}/1349-192"), []),
    ("qa008", "wdi", "May notice under Okla. Stat. tit. 24, 163 be provided in writing, by telephone, or by electronic means after unencrypted personal information is accessed?",
     chunk_ref(f"{OK}/24-163"), []),
    ("qa009", "wdi", "Why is a willful failure to give notice an unlawful practice under the Security Breach Notification Act?",
     chunk_ref(f"{OK}/24-164"), []),
    ("qa010", "wdi", "What offense against users of computers does section 815.06 create?",
     chunk_ref("Florida/Digital Crime Act/815-06"), []),
    ("qa011", "wdi", "What punishment does section 16-9-93 set for computer trespass?",
     chunk_ref("Georgia/Digital Crime Act/16-9-93"), []),
    ("qa012", "wdi", "What does section 43-1-130 require for the annual highway maintenance schedule?",
     chunk_ref("Colorado/Transportation Act/43-1-130"), []),
    ("qa013", "wdi", "When is a data protection assessment required under section 6-1-1305?",
     chunk_ref("Colorado/Consumer Data Privacy/6-1-1305"), []),
    ("qa014", "wdi", "What may the commissioner of transportation do under section 13b-34 regarding rail passenger service?",
     chunk_ref("Connecticut/Transportation Act/13b-34"), []),
    ("qa015", "wdi", "How does section 42-515 limit the collection of personal data?",
     chunk_ref("Connecticut/Data Privacy Act/42-515"), []),
    ("qa016", "wdi", "What must each insurance carrier maintain under Ins. 31-1003?",
     chunk_ref("Maryland/Insurance Data Security/31-1003"), []),
    ("qa017", "wdi", "Must sensitive personal information breaches under Bus. & Com. Code 521.053 be disclosed not later than the sixtieth day after the date the breach is determined?",
     chunk_ref("Texas/Identity Theft Protection/521-053"), []),
    ("qa018", "wdi", "Does section 899-bb require a business to develop, implement, and maintain reasonable safeguards to protect the security, confidentiality, and integrity of private information?",
     chunk_ref("New York/Data Security Act/899-bb"), []),
    ("qa019", "wdi", "Within how many days after a breach is discovered must notification be made under Rev. Code 19.255.010, and does the thirty day limit apply?",
     chunk_ref("Washington/Data Breach Notification Act/19-255-010"), []),
    ("qa020", "wdi", "What conduct does 18 U.S.C. 1030 punish regarding protected computers?",
     chunk_ref("Federal/Computer Fraud and Abuse Act/1030"), []),
    ("qa021", "wdi", "What notification does 45 C.F.R. 164.404 require after discovery of a breach of unsecured protected health information?",
     chunk_ref("Federal/Health Breach Notification Rule/164-404"), []),
    ("qa022", "wdi", "What does GDPR Article 33 require after a personal data breach?",
     chunk_ref("International/General Data Protection Regulation/article-33"), []),
    ("qa023", "wdi", "What does s. 67 of the Data Protection Act 2018 require within seventy two hours?",
     chunk_ref("International/United Kingdom Data Protection/s67"), []),
    ("qa024", "wdi", "Which documents count as identification documents, such as a birth certificate or a driver license?",
     chunk_ref(f"{AL}/13A-8-111"), []),
    ("qa025", "wdi", "What damage amount makes computer tampering a Class C felony instead of a Class A misdemeanor?",
     chunk_ref(f"{AL}/13A-8-112"), []),
    ("qa026", "wdi", "Which statute requires resurfacing funds to be allocated among the engineering regions?",
     chunk_ref("Colorado/Transportation Act/43-1-130"), []),
    ("qa027", "wdi", "Under 18 U.S.C. 1030, is any computer used in or affecting interstate or foreign commerce or communication of the United States a protected computer?",
     chunk_ref("Federal/Computer Fraud and Abuse Act/1030"), []),
    ("qa028", "wdi", "How soon must the supervisory authority be notified of a personal data breach, where feasible?",
     chunk_ref("International/General Data Protection Regulation/article-33"), []),
    ("qa029", "wdi", "What reasons must accompany a late notification to the Information Commissioner?",
     chunk_ref("International/United Kingdom Data Protection/s67"), []),
    ("qa030", "wdi", "What definitions does 13A-8-110 provide for terms such as computer network, computer program, and data?",
     f"{AL}/13A-8-110.txt#0", []),
    # -- state-wise questions with exact references ------------------------
    ("qa031", "swi", "What is the definition of identification documents according to Alabama acts?",
     {"Alabama": chunk_ref(f"{AL}/13A-8-111")}, ["Alabama"]),
    ("qa032", "swi", "How is the crime of computer tampering punished in Alabama?",
     {"Alabama": chunk_ref(f"{AL}/13A-8-112")}, ["Alabama"]),
    ("qa033", "swi", "What does Kansas law require after a security breach investigation determines misuse of information?",
     {"Kansas": chunk_ref(f"{KS}/Data Breach Notification Act/50-7a02")}, ["Kansas"]),
    ("qa034", "swi", "Which unlawful computer acts are nonperson felonies in Kansas?",
     {"Kansas": chunk_ref(f"{KS}/Digital Crime Act/21-5839")}, ["Kansas"]),
    ("qa035", "swi", "What are the maximum penalties for failing to follow the data breach notification statutes in Ohio and Oklahoma?",
     {"Ohio": chunk_ref(f"{OH}/1349-192"), "Oklahoma": chunk_ref(f"{OK}/24-164")},
     ["Ohio", "Oklahoma"]),
    ("qa036", "swi", "How quickly must Ohio residents be told about a breach of the security of the system?",
     {"Ohio": chunk_ref(f"{OH}/1349-19")}, ["Ohio"]),
    ("qa037", "swi", "How may notice be provided to Oklahoma residents after unencrypted personal information is accessed?",
     {"Oklahoma": chunk_ref(f"{OK}/24-163")}, ["Oklahoma"]),
    ("qa038", "swi", "Which computer offenses are felonies of the third degree in Florida?",
     {"Florida": chunk_ref("Florida/Digital Crime Act/815-06")}, ["Florida"]),
    ("qa039", "swi", "How does Georgia punish the crime of computer trespass?",
     {"Georgia": chunk_ref("Georgia/Digital Crime Act/16-9-93")}, ["Georgia"]),
    ("qa040", "swi", "Give me an extensive comparison between Colorado Transportation act and Connecticut transportation act.",
     {"Colorado": chunk_ref("Colorado/Transportation Act/43-1-130"),
      "Connecticut": chunk_ref("Connecticut/Transportation Act/13b-34")},
     ["Colorado", "Connecticut"]),
    ("qa041", "swi", "What written information security program must Maryland insurance carriers maintain?",
     {"Maryland": chunk_ref("Maryland/Insurance Data Security/31-1003")}, ["Maryland"]),
    ("qa042", "swi", "What breach disclosure deadline applies to businesses in Texas?",
     {"Texas": chunk_ref("Texas/Identity Theft Protection/521-053")}, ["Texas"]),
    ("qa043", "swi", "What safeguards must businesses in New York implement for private information?",
     {"New York": chunk_ref("New York/Data Security Act/899-bb")}, ["New York"]),
    ("qa044", "swi", "What is the breach notification deadline in Washington?",
     {"Washington": chunk_ref("Washington/Data Breach Notification Act/19-255-010")},
     ["Washington"]),
    ("qa045", "swi", "Give me a comparison between the Digital Crime Acts of Florida and its neighboring states.",
     {"Florida": chunk_ref("Florida/Digital Crime Act/815-06"),
      "Alabama": None, "Georgia": None},
     ["Florida", "Alabama", "Georgia"]),
    # -- prose references --------------------------------------------------
    ("qa046", "prose", "How do states address cybersecurity risks associated with cloud computing?",
     "States take varied approaches to cybersecurity, with several requiring reasonable safeguards for computerized personal information and timely disclosure when the security of a system is breached.",
     []),
    ("qa047", "prose", "How do most states define critical infrastructure in their statutes?",
     "Definitions vary, but state statutes commonly reach computers, computer systems, and computer networks, and some extend protection to data processing devices and communications facilities.",
     None),
    ("qa048", "prose", "What are common elements of state data breach notification laws?",
     "Most laws require an entity that owns or licenses computerized personal information to investigate a breach and notify affected residents within a fixed period, often thirty to sixty days.",
     None),
    ("qa049", "prose", "Does Colorado require privacy risk assessments for profiling?",
     "Yes. Colorado requires a data protection assessment before processing that presents a heightened risk of harm, including profiling that presents a risk of unfair treatment and processing of sensitive data.",
     ["Colorado"]),
    ("qa050", "prose", "Which penalties apply to unauthorized computer access under the federal act?",
     "Federal law punishes intentionally accessing a protected computer without authorization by fine or imprisonment when the conduct causes damage and loss.",
     ["Federal"]),
    ("qa051", "prose", "What deadlines do international data protection rules set for breach notification?",
     "International rules commonly require notifying the supervisory authority within seventy two hours of becoming aware of a personal data breach, unless the breach is unlikely to create risk.",
     []),
    ("qa052", "prose", "Is a seventy two hour notification rule common outside the United States?",
     "Yes, both the European regulation and the United Kingdom act require notice to the authority within seventy two hours of awareness.",
     []),
    ("qa053", "prose", "How does Connecticut limit data collection by controllers?",
     "Connecticut limits collection of personal data to what is adequate, relevant, and reasonably necessary for disclosed purposes, with safeguards matched to the data involved.",
     ["Connecticut"]),
    ("qa054", "prose", "What transportation planning duties exist in Colorado and Connecticut?",
     "Colorado requires an annual prioritized highway maintenance schedule, while Connecticut directs its commissioner to run rail passenger service and coordinate bus and rail timetables.",
     ["Colorado", "Connecticut"]),
    ("qa055", "prose", "When is breach notice required in Texas and Washington?",
     "Texas requires disclosure within sixty days of determining a breach, and Washington requires notification within thirty days of discovery.",
     ["Texas", "Washington"]),
    # -- questions the corpus cannot answer --------------------------------
    ("qa056", "nf_swi", "What does California law say about data breach notification?",
     None, ["California"]),
    ("qa057", "nf_swi", "How does California regulate computer crimes?",
     None, ["California"]),
    ("qa058", "nf_wdi", "Quantum teleportation licensing fees for orbital habitats?",
     None, []),
    ("qa059", "nf_wdi", "Maritime salvage rules governing sunken galleon platinum recovery?",
     None, []),
]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=str(FIXTURES / "qa_dataset.jsonl"))
    args = parser.parse_args()

    documents = load_corpus(FIXTURES / "corpus")
    citations = {d.doc_id: d.citation for d in documents}
    chunks = chunk_corpus(documents, 1000, 200)
    embedder = LocalHashEmbedder(EmbedderSpec(kind=EmbedderKind.LOCAL_HASH, dim=256))
    vectors = {c.chunk_id: embedder.embed_text(c.text) for c in chunks}
    adjacency = load_adjacency(FIXTURES / "adjacency.json")
    by_id = {c.chunk_id: c for c in chunks}

    def scan(question: str, state: str | None = None):
        """Brute-force ranking of every chunk (optionally one partition)."""
        q = embedder.embed_text(question)
        scored = [(cosine(q, vectors[c.chunk_id]), c.chunk_id) for c in chunks
                  if state is None or c.jurisdiction.label == state]
        scored.sort(key=lambda t: (-t[0], t[1]))
        return scored

    def stub_answer(chunk_id: str) -> str:
        chunk = by_id[chunk_id]
        return f"According to {citations[chunk.doc_id]}: {chunk.text}"

    lines = []
    problems = []
    for rec_id, mode, question, payload, expected in RECORDS:
        decision = route(question, adjacency=adjacency)
        routed = [j.label for j in decision.states]
        if expected is not None and routed != expected:
            problems.append(f"{rec_id}: routed {routed}, expected {expected}")
            continue

        if mode == "wdi":
            ranking = scan(question)
            top_score, top_id = ranking[0]
            if top_id != payload:
                problems.append(f"{rec_id}: top chunk {top_id} (score {top_score:.3f}), "
                                f"wanted {payload}")
                continue
            if top_score < THRESHOLD:
                problems.append(f"{rec_id}: top score {top_score:.3f} below threshold")
                continue
            reference = stub_answer(top_id)
        elif mode == "swi":
            sections = []
            bad = False
            for state in expected:
                score, top_id = scan(question, state)[0]
                wanted = payload.get(state)
                if wanted is not None and top_id != wanted:
                    problems.append(f"{rec_id}/{state}: top chunk {top_id}, wanted {wanted}")
                    bad = True
                    break
                text = stub_answer(top_id) if score >= THRESHOLD else SENTINEL
                sections.append(f"{state}: {text}")
            if bad:
                continue
            reference = ("Looking into the following state(s): " + ", ".join(expected)
                         + "\n" + "\n".join(sections))
        elif mode == "nf_wdi":
            top_score, top_id = scan(question)[0]
            if top_score >= THRESHOLD:
                problems.append(f"{rec_id}: expected no answer but {top_id} "
                                f"scored {top_score:.3f}")
                continue
            reference = SENTINEL
        elif mode == "nf_swi":
            reference = ("Looking into the following state(s): " + ", ".join(expected)
                         + "\n" + "\n".join(f"{s}: {SENTINEL}" for s in expected))
        else:
            reference = payload

        record = {"id": rec_id, "question": question, "reference_answer": reference,
                  "expected_states": expected}
        lines.append(json.dumps(record, ensure_ascii=False))

    if problems:
        for problem in problems:
            print("FAIL", problem, file=sys.stderr)
        return 1

    Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {len(lines)} records to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
