// Built-in phenotype vocabularies. Few-shot snippets are synthetic
// placeholders; replace them with institution-specific examples.

#include <string_view>

namespace phenomine::detail {

extern const std::string_view kList1Json;
extern const std::string_view kList2Json;

const std::string_view kList1Json = R"JSON({
  "list_id": "list1",
  "categories": [
    {
      "name": "Memory Indicators",
      "phrase": "memory indicators of ADRD",
      "candidates": [
        {"id": "repeating", "display_name": "Repeating",
         "aliases": ["repeating", "repetitive questions", "repeats questions", "repetition"]},
        {"id": "misplacing", "display_name": "Misplacing",
         "aliases": ["misplacing", "misplaces items", "losing things"]}
      ],
      "few_shot_examples": [
        {"note_excerpt": "Daughter reports he asks the same question several times an hour.",
         "expected_output": "repeating"},
        {"note_excerpt": "Wife notes she keeps losing her glasses and repeats stories at dinner.",
         "expected_output": "repeating, misplacing"},
        {"note_excerpt": "Pt ambulating independently, tolerating regular diet.",
         "expected_output": "none"}
      ]
    },
    {
      "name": "Comorbidities",
      "phrase": "comorbidities of ADRD",
      "candidates": [
        {"id": "hypertension", "display_name": "Hypertension",
         "aliases": ["hypertension", "htn", "high blood pressure"]},
        {"id": "depression", "display_name": "Depression",
         "aliases": ["depression", "depressive disorder", "mdd", "major depressive disorder"]}
      ],
      "few_shot_examples": [
        {"note_excerpt": "PMH notable for HTN on lisinopril.",
         "expected_output": "hypertension"},
        {"note_excerpt": "History of major depressive disorder, continued sertraline.",
         "expected_output": "depression"},
        {"note_excerpt": "Right wrist fracture, splinted in ED.",
         "expected_output": "none"}
      ]
    },
    {
      "name": "Family History",
      "phrase": "family history of ADRD",
      "candidates": [
        {"id": "family_history", "display_name": "Family history",
         "aliases": ["family history", "family history of dementia", "fhx"]}
      ],
      "few_shot_examples": [
        {"note_excerpt": "Mother had Alzheimer disease in her seventies.",
         "expected_output": "family history"},
        {"note_excerpt": "Family history noncontributory.",
         "expected_output": "none"},
        {"note_excerpt": "Father diagnosed with dementia at age 80.",
         "expected_output": "family history"}
      ]
    },
    {
      "name": "Neurobehavioral Tests/Ratings",
      "phrase": "neurobehavioral tests/ratings of ADRD",
      "candidates": [
        {"id": "mmse", "display_name": "Mini Mental Status Exam (MMSE)",
         "aliases": ["mini mental status exam", "mini-mental state examination", "mini mental state exam", "mmse"]},
        {"id": "cdr", "display_name": "Clinical Dementia Rating (CDR)",
         "aliases": ["clinical dementia rating", "cdr"]}
      ],
      "few_shot_examples": [
        {"note_excerpt": "MMSE 22/30 on today's screen.",
         "expected_output": "mini mental status exam (mmse)"},
        {"note_excerpt": "Global CDR 1 per memory clinic.",
         "expected_output": "clinical dementia rating (cdr)"},
        {"note_excerpt": "Alert and oriented x3, no focal deficits.",
         "expected_output": "none"}
      ]
    },
    {
      "name": "Neuroimaging Findings",
      "phrase": "neuroimaging findings of ADRD",
      "candidates": [
        {"id": "atrophy", "display_name": "Atrophy",
         "aliases": ["atrophy", "brain atrophy", "cerebral atrophy", "volume loss"]},
        {"id": "infarct", "display_name": "Infarct",
         "aliases": ["infarct", "infarction", "infarcts"]}
      ],
      "few_shot_examples": [
        {"note_excerpt": "CT head: diffuse cerebral volume loss, old left MCA territory infarct.",
         "expected_output": "atrophy, infarct"},
        {"note_excerpt": "MRI brain without acute intracranial process.",
         "expected_output": "none"},
        {"note_excerpt": "Moderate generalized atrophy noted on imaging.",
         "expected_output": "atrophy"}
      ]
    },
    {
      "name": "Biomarker Test Results",
      "phrase": "biomarker test results of ADRD",
      "candidates": [
        {"id": "tau", "display_name": "Total tau and phosphorylated tau",
         "aliases": ["total tau", "phosphorylated tau", "p-tau", "t-tau", "tau"]}
      ],
      "few_shot_examples": [
        {"note_excerpt": "CSF showed elevated total tau and p-tau181.",
         "expected_output": "total tau and phosphorylated tau"},
        {"note_excerpt": "Labs: CBC and BMP within normal limits.",
         "expected_output": "none"},
        {"note_excerpt": "Outside records list a phosphorylated tau level.",
         "expected_output": "total tau and phosphorylated tau"}
      ]
    }
  ]
})JSON";

const std::string_view kList2Json = R"JSON({
  "list_id": "list2",
  "categories": [
    {
      "name": "Memory",
      "phrase": "memory",
      "candidates": [
        {"id": "recent_events", "display_name": "Recent Events",
         "aliases": ["recent events", "short-term memory loss", "recent memory"]},
        {"id": "remote_events", "display_name": "Remote Events",
         "aliases": ["remote events", "long-term memory loss", "remote memory"]},
        {"id": "misplacing", "display_name": "Misplacing",
         "aliases": ["misplacing", "misplaces items", "losing things"]},
        {"id": "missing_appointments", "display_name": "Missing Appointments",
         "aliases": ["missing appointments", "missed appointments"]}
      ],
      "few_shot_examples": [
        {"note_excerpt": "Cannot recall what she ate for breakfast and missed two clinic visits.",
         "expected_output": "recent events, missing appointments"},
        {"note_excerpt": "Tolerated PT session well.",
         "expected_output": "none"},
        {"note_excerpt": "Family reports he frequently misplaces his wallet.",
         "expected_output": "misplacing"}
      ]
    },
    {
      "name": "Executive Functions",
      "phrase": "executive functions",
      "candidates": [
        {"id": "planning", "display_name": "Planning and organization",
         "aliases": ["planning and organization", "planning", "organization"]},
        {"id": "multitasking", "display_name": "Multi-tasking",
         "aliases": ["multi-tasking", "multitasking"]},
        {"id": "concentration", "display_name": "Concentration",
         "aliases": ["concentration", "poor concentration", "attention"]},
        {"id": "judgement", "display_name": "Judgement",
         "aliases": ["judgement", "judgment", "poor judgement", "poor judgment"]},
        {"id": "problem_solving", "display_name": "Problem-solving",
         "aliases": ["problem-solving", "problem solving"]}
      ],
      "few_shot_examples": [
        {"note_excerpt": "Son now manages her bills because she cannot organize them.",
         "expected_output": "planning and organization"},
        {"note_excerpt": "Insight and judgment impaired.",
         "expected_output": "judgement"},
        {"note_excerpt": "Vitals stable overnight.",
         "expected_output": "none"}
      ]
    },
    {
      "name": "Language",
      "phrase": "language",
      "candidates": [
        {"id": "word_finding", "display_name": "Word-finding",
         "aliases": ["word-finding", "word finding", "word-finding difficulty", "anomia"]},
        {"id": "slurred_speech", "display_name": "Slurred speech",
         "aliases": ["slurred speech", "dysarthria"]},
        {"id": "halting", "display_name": "Halting or stuttering",
         "aliases": ["halting or stuttering", "halting", "stuttering"]},
        {"id": "language_impairment", "display_name": "Impairment",
         "aliases": ["impairment", "language impairment", "aphasia"]},
        {"id": "abnormal_speech", "display_name": "Abnormal speech",
         "aliases": ["abnormal speech"]}
      ],
      "few_shot_examples": [
        {"note_excerpt": "Pauses frequently searching for words.",
         "expected_output": "word-finding"},
        {"note_excerpt": "Speech fluent and clear.",
         "expected_output": "none"},
        {"note_excerpt": "Mild dysarthria since admission.",
         "expected_output": "slurred speech"}
      ]
    },
    {
      "name": "Visuospatial Skills",
      "phrase": "visuospatial skills",
      "candidates": [
        {"id": "finding_way", "display_name": "Finding way around",
         "aliases": ["finding way around", "wayfinding"]},
        {"id": "lost_familiar", "display_name": "Lost in familiar places",
         "aliases": ["lost in familiar places", "gets lost"]},
        {"id": "driving", "display_name": "Driving problem",
         "aliases": ["driving problem", "driving problems"]},
        {"id": "seeing_things", "display_name": "Seeing things",
         "aliases": ["seeing things"]},
        {"id": "recognizing", "display_name": "Recognizing objects or faces",
         "aliases": ["recognizing objects or faces", "prosopagnosia", "agnosia"]}
      ],
      "few_shot_examples": [
        {"note_excerpt": "Got lost driving to her daughter's house of 20 years.",
         "expected_output": "lost in familiar places, driving problem"},
        {"note_excerpt": "Ambulates with walker, steady gait.",
         "expected_output": "none"},
        {"note_excerpt": "Did not recognize his grandson during the visit.",
         "expected_output": "recognizing objects or faces"}
      ]
    },
    {
      "name": "Behavior",
      "phrase": "behavior",
      "candidates": [
        {"id": "emotional_expression", "display_name": "Emotional expression",
         "aliases": ["emotional expression", "emotional lability"]},
        {"id": "personality", "display_name": "Personality or behavior",
         "aliases": ["personality or behavior", "personality change", "behavior change"]},
        {"id": "agitation", "display_name": "Agitation and aggression",
         "aliases": ["agitation and aggression", "agitation", "aggression"]},
        {"id": "apathy", "display_name": "Apathy or decreased motivation",
         "aliases": ["apathy or decreased motivation", "apathy", "decreased motivation"]},
        {"id": "hygiene_eating", "display_name": "Hygiene and eating",
         "aliases": ["hygiene and eating", "poor hygiene", "poor oral intake"]},
        {"id": "depression_anxiety", "display_name": "Depression or anxiety",
         "aliases": ["depression or anxiety", "depression", "anxiety"]},
        {"id": "hallucination", "display_name": "Hallucination",
         "aliases": ["hallucination", "hallucinations"]},
        {"id": "weight_change", "display_name": "Weight change",
         "aliases": ["weight change", "weight loss", "weight gain"]}
      ],
      "few_shot_examples": [
        {"note_excerpt": "Became combative with staff overnight, required redirection.",
         "expected_output": "agitation and aggression"},
        {"note_excerpt": "Reports seeing children in the room who are not there.",
         "expected_output": "hallucination"},
        {"note_excerpt": "Pleasant and cooperative with exam.",
         "expected_output": "none"}
      ]
    }
  ]
})JSON";

}  // namespace phenomine::detail
