#!/usr/bin/env python3
"""Generate the synthetic demo corpus under data/demo.

Every phenotype is planted through one trigger phrase that the mock backend
rules also use, so the expected feature matrix is known exactly.
"""
import argparse
import csv
import json
import random
from pathlib import Path

# (list, category, phenotype id, display name, trigger sentence, trigger, cognitive?)
PHENOTYPES = [
    ("list1", "Memory Indicators", "repeating", "Repeating",
     "Daughter notes the patient repeats the same questions during visits.", "repeats the same questions", True),
    ("list1", "Memory Indicators", "misplacing", "Misplacing",
     "Family reports the patient misplaces her keys most days.", "misplaces", True),
    ("list1", "Comorbidities", "hypertension", "Hypertension",
     "Past history includes hypertension managed with lisinopril.", "hypertension", False),
    ("list1", "Comorbidities", "depression", "Depression",
     "Chart documents longstanding depressed mood treated with sertraline.", "depressed mood", False),
    ("list1", "Family History", "family_history", "Family history",
     "Patient states that the mother had dementia late in life.", "mother had dementia", False),
    ("list1", "Neurobehavioral Tests/Ratings", "mmse", "Mini Mental Status Exam (MMSE)",
     "MMSE score recorded as 21 of 30 today.", "mmse score", True),
    ("list1", "Neurobehavioral Tests/Ratings", "cdr", "Clinical Dementia Rating (CDR)",
     "Clinical dementia rating was assessed at 1.0.", "clinical dementia rating", True),
    ("list1", "Neuroimaging Findings", "atrophy", "Atrophy",
     "MRI shows bilateral hippocampal atrophy.", "hippocampal atrophy", True),
    ("list1", "Neuroimaging Findings", "infarct", "Infarct",
     "Head CT shows an old lacunar infarct in the left basal ganglia.", "lacunar infarct", False),
    ("list1", "Biomarker Test Results", "tau", "Total tau and phosphorylated tau",
     "Lumbar puncture showed elevated CSF tau levels.", "elevated csf tau", True),
    ("list2", "Memory", "recent_events", "Recent Events",
     "Spouse says the patient forgets recent conversations within hours.", "forgets recent conversations", True),
    ("list2", "Memory", "remote_events", "Remote Events",
     "Has trouble recalling childhood events when asked.", "trouble recalling childhood events", True),
    ("list2", "Memory", "misplacing", "Misplacing",
     "Family reports the patient misplaces her keys most days.", "misplaces", True),
    ("list2", "Memory", "missing_appointments", "Missing Appointments",
     "Patient missed several appointments this spring.", "missed several appointments", True),
    ("list2", "Executive Functions", "planning", "Planning and organization",
     "Caregiver describes difficulty planning meals for the week.", "difficulty planning meals", True),
    ("list2", "Executive Functions", "multitasking", "Multi-tasking",
     "Reports that the patient cannot multitask at home anymore.", "cannot multitask", True),
    ("list2", "Executive Functions", "concentration", "Concentration",
     "Nursing notes poor concentration during teaching.", "poor concentration", True),
    ("list2", "Executive Functions", "judgement", "Judgement",
     "Impaired judgement noted when managing finances.", "impaired judgement", True),
    ("list2", "Executive Functions", "problem_solving", "Problem-solving",
     "Has trouble solving simple problems such as using the phone.", "trouble solving simple problems", True),
    ("list2", "Language", "word_finding", "Word-finding",
     "Word-finding difficulty is evident in conversation.", "word-finding difficulty", True),
    ("list2", "Language", "slurred_speech", "Slurred speech",
     "Slurred speech was observed on arrival.", "slurred speech", False),
    ("list2", "Language", "halting", "Halting or stuttering",
     "Speech is halting with frequent pauses.", "halting with frequent pauses", True),
    ("list2", "Language", "language_impairment", "Impairment",
     "Neurology documents language impairment on exam.", "language impairment", True),
    ("list2", "Language", "abnormal_speech", "Abnormal speech",
     "Tangential speech noted throughout the interview.", "tangential speech", True),
    ("list2", "Visuospatial Skills", "finding_way", "Finding way around",
     "Has trouble finding the way around the unit.", "finding the way around", True),
    ("list2", "Visuospatial Skills", "lost_familiar", "Lost in familiar places",
     "Got lost in a familiar store last month.", "lost in a familiar store", True),
    ("list2", "Visuospatial Skills", "driving", "Driving problem",
     "Stopped driving after a minor accident.", "stopped driving", False),
    ("list2", "Visuospatial Skills", "seeing_things", "Seeing things",
     "Reports trouble seeing things clearly at night.", "trouble seeing things", False),
    ("list2", "Visuospatial Skills", "recognizing", "Recognizing objects or faces",
     "At times does not recognize family members.", "does not recognize family members", True),
    ("list2", "Behavior", "emotional_expression", "Emotional expression",
     "Flat affect observed throughout the shift.", "flat affect", True),
    ("list2", "Behavior", "personality", "Personality or behavior",
     "Family describes a personality change over the last year.", "personality change", True),
    ("list2", "Behavior", "agitation", "Agitation and aggression",
     "Became agitated and aggressive overnight.", "agitated and aggressive", True),
    ("list2", "Behavior", "apathy", "Apathy or decreased motivation",
     "Appears apathetic and unmotivated for therapy.", "apathetic and unmotivated", True),
    ("list2", "Behavior", "hygiene_eating", "Hygiene and eating",
     "Caregiver reports the patient neglects hygiene and skips meals.", "neglects hygiene", True),
    ("list2", "Behavior", "depression_anxiety", "Depression or anxiety",
     "Appears anxious and tearful at times.", "anxious and tearful", False),
    ("list2", "Behavior", "hallucination", "Hallucination",
     "Reports auditory hallucinations at night.", "auditory hallucinations", True),
    ("list2", "Behavior", "weight_change", "Weight change",
     "Unintentional weight loss of five pounds noted.", "unintentional weight loss", False),
]

FILLER = [
    "Patient admitted for evaluation of a urinary tract infection.",
    "Vital signs stable overnight.",
    "Tolerating a regular diet.",
    "Ambulating with a walker under supervision.",
    "Pain controlled with acetaminophen.",
    "Skin intact, no pressure injuries.",
    "Dr. Smith reviewed the plan with the family.",
    "Lungs clear to auscultation bilaterally.",
    "Discharge planning discussed with social work.",
    "Denies chest pain or shortness of breath.",
    "Blood glucose within target range.",
    "Physical therapy recommends home exercises.",
    "Patient reports memory loss over the past year.",
    "Follow up with primary care in two weeks.",
]

COHORT_CODES = {
    "ADRD": [("10", "G30.9"), ("10", "F03.90"), ("9", "331.0"), ("10", "G30.1"), ("9", "290.40")],
    "MCI": [("10", "G31.84"), ("9", "331.83")],
    "CN": [("10", "I10"), ("10", "E11.9"), ("9", "401.9"), ("10", "N39.0")],
}

PREVALENCE = {  # cohort -> (cognitive, other)
    "CN": (0.12, 0.35),
    "MCI": (0.55, 0.40),
    "ADRD": (0.80, 0.45),
}

DICTIONARY = [
    ("memory loss", "C0751295"),
    ("hypertension", "C0020538"),
    ("hippocampal atrophy", "C4551615"),
    ("lacunar infarct", "C0333559"),
    ("slurred speech", "C0234518"),
    ("auditory hallucinations", "C0233762"),
    ("weight loss", "C1262477"),
    ("urinary tract infection", "C0042029"),
    ("walker", "C0336606"),
    ("pain", "C0030193"),
    ("gait", "C0016928"),
    ("fall", "C0085639"),
    ("aphasia", "C0003537"),
]


def build(out: Path, seed: int) -> None:
    rng = random.Random(seed)
    triggers = sorted({p[5] for p in PHENOTYPES})
    for sentence in FILLER:
        assert not any(t in sentence.lower() for t in triggers), sentence

    # The two misplacing phenotypes share a sentence, so plant them together.
    by_trigger = {}
    for p in PHENOTYPES:
        by_trigger.setdefault(p[5], []).append(p)

    notes, diagnoses, truth, ner = [], [], [], []
    cohorts = ["CN"] * 10 + ["MCI"] * 10 + ["ADRD"] * 10
    for i, cohort in enumerate(cohorts, start=1):
        note_id, patient_id = f"n{i:02d}", f"p{i:02d}"
        cog, other = PREVALENCE[cohort]
        planted = []
        for trig in sorted(by_trigger):
            group = by_trigger[trig]
            if rng.random() < (cog if group[0][6] else other):
                planted.append(group)
        sentences = rng.sample(FILLER, 4) + [g[0][4] for g in planted]
        rng.shuffle(sentences)
        text = " ".join(sentences)
        for group in planted:
            for p in group:
                truth.append((note_id, p[0], p[1], p[2]))
                ner.append({"note_id": note_id, "concept": p[3].lower(), "score": round(rng.uniform(0.6, 1.0), 3)})
        for sentence in sentences:
            lowered = sentence.lower()
            present = [t for t in triggers if t in lowered]
            assert all(any(t == g[0][5] for g in planted) for t in present), (note_id, sentence)

        age = rng.randint(55, 88)
        notes.append({"note_id": note_id, "patient_id": patient_id, "age": age,
                      "history_years": rng.randint(2, 12), "on_dementia_meds": "false", "text": text})
        version, code = rng.choice(COHORT_CODES[cohort])
        diagnoses.append((patient_id, version, code))
        if cohort != "CN":
            version, code = rng.choice(COHORT_CODES["CN"])
            diagnoses.append((patient_id, version, code))

    out.mkdir(parents=True, exist_ok=True)
    with open(out / "notes.csv", "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=["note_id", "patient_id", "age", "history_years", "on_dementia_meds", "text"],
                           lineterminator="\n")
        w.writeheader()
        w.writerows(notes)
    with open(out / "diagnoses.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["patient_id", "icd_version", "icd_code"])
        w.writerows(diagnoses)
    with open(out / "mock_rules.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["category", "trigger", "phenotype"])
        for p in PHENOTYPES:
            w.writerow([p[1], p[5], p[3]])
    with open(out / "planted_truth.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["note_id", "list", "category", "phenotype_id"])
        w.writerows(truth)
    with open(out / "dictionary.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["term", "concept_id"])
        w.writerows(DICTIONARY)
    with open(out / "ner_annotations.jsonl", "w") as f:
        for a in ner:
            f.write(json.dumps(a) + "\n")
        f.write('{"note_id": "n01", "concept": "broken line"\n')


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "data" / "demo")
    ap.add_argument("--seed", type=int, default=20240601)
    args = ap.parse_args()
    build(args.out, args.seed)


if __name__ == "__main__":
    main()
