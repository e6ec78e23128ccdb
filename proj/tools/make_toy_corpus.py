#!/usr/bin/env python3
# Copyright 2026 The dpnote Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Writes the bundled toy corpus: 60 public, 30 private-train and 10
private-test discharge summaries with made-up content and diagnosis labels.

Output is a pure function of --seed.
"""

import argparse
import json
import pathlib
import random

# (condition, label, presenting symptoms, findings, tests, medications)
CONDITIONS = [
    ("pneumonia", "J18", ["cough", "fever", "shortness of breath"],
     ["crackles at the right base"], ["chest x-ray", "blood cultures"],
     ["ceftriaxone", "azithromycin"]),
    ("congestive heart failure", "I50", ["shortness of breath", "edema"],
     ["bilateral lower extremity edema", "elevated jugular venous pressure"],
     ["echocardiogram", "bnp"], ["furosemide", "metoprolol", "lisinopril"]),
    ("acute kidney injury", "N17", ["nausea", "vomiting"],
     ["dry mucous membranes"], ["creatinine", "renal ultrasound"],
     ["intravenous fluids"]),
    ("atrial fibrillation", "I48", ["palpitations", "dizziness"],
     ["irregularly irregular rhythm"], ["electrocardiogram", "troponin"],
     ["metoprolol", "apixaban"]),
    ("urinary tract infection", "N39", ["dysuria", "fever"],
     ["suprapubic tenderness"], ["urinalysis", "urine culture"],
     ["ceftriaxone", "nitrofurantoin"]),
    ("chronic obstructive pulmonary disease exacerbation", "J44",
     ["cough", "wheezing", "shortness of breath"], ["diffuse expiratory wheezes"],
     ["chest x-ray", "arterial blood gas"], ["albuterol", "prednisone"]),
    ("cellulitis", "L03", ["leg pain", "fever"],
     ["erythema and warmth of the left leg"], ["blood cultures", "lactate"],
     ["vancomycin", "cefazolin"]),
    ("gastrointestinal bleed", "K92", ["melena", "dizziness"],
     ["pale conjunctivae"], ["hemoglobin", "upper endoscopy"],
     ["pantoprazole", "packed red blood cells"]),
]

COMORBIDITIES = [
    ("hypertension", "I10", "lisinopril"),
    ("type 2 diabetes mellitus", "E11", "metformin"),
    ("hyperlipidemia", "E78", "atorvastatin"),
    ("coronary artery disease", "I25", "aspirin"),
    ("hypothyroidism", "E03", "levothyroxine"),
    ("gastroesophageal reflux disease", "K21", "omeprazole"),
    ("depression", "F32", "sertraline"),
    ("anemia", "D64", "ferrous sulfate"),
]

SERVICES = ["MEDICINE", "CARDIOLOGY", "SURGERY", "NEUROLOGY"]
ALLERGIES = ["No Known Allergies / Adverse Drug Reactions", "Penicillins",
             "Sulfa (Sulfonamide Antibiotics)", "Codeine", "Lisinopril"]
SOCIAL = [
    "Lives with her husband. Former smoker, quit twenty years ago. Drinks "
    "alcohol rarely.",
    "Lives alone. Denies tobacco or illicit drug use. Retired teacher.",
    "Lives with family. Current smoker, one pack per day. No alcohol use.",
    "Lives in an assisted living facility. Walks with a cane.",
]
FAMILY = [
    "Mother with hypertension. Father died of myocardial infarction.",
    "Noncontributory.",
    "Sister with type 2 diabetes mellitus. No family history of cancer.",
]
DISPOSITIONS = ["Home", "Home With Service", "Extended Care"]
CONDITIONS_AT_DISCHARGE = [
    "Mental Status: Clear and coherent. Level of Consciousness: Alert and "
    "interactive. Activity Status: Ambulatory - Independent.",
    "Mental Status: Clear and coherent. Level of Consciousness: Alert and "
    "interactive. Activity Status: Ambulatory - requires assistance or aid.",
]


def hpi(rng, age, sex, cond, comorbid):
    pron = "She" if sex == "F" else "He"
    history = ", ".join(c[0] for c in comorbid) or "no significant past history"
    symptoms = " and ".join(cond[2])
    days = rng.choice(["two", "three", "four", "five"])
    extra = rng.choice([
        f"{pron} denies chest pain or headache.",
        f"{pron} reports decreased appetite and fatigue.",
        f"{pron} was seen in the emergency department where vital signs were "
        "notable for tachycardia.",
        f"{pron} denies abdominal pain, diarrhea or recent travel.",
    ])
    # An inline mention of a section title that must not split the note.
    inline = rng.choice([
        "",
        f" Per the Social History: section of a prior note, {pron.lower()} "
        "lives nearby.",
        " The Physical Exam: was limited by discomfort in triage.",
    ])
    return (f"Ms. ___ is a {age} year old woman" if sex == "F" else
            f"Mr. ___ is a {age} year old man") + (
        f" with a history of {history} who presents with {symptoms} for "
        f"{days} days. {extra}{inline}")


def physical_exam(rng, cond):
    temp = round(rng.uniform(36.5, 39.2), 1)
    hr = rng.randint(62, 118)
    sbp = rng.randint(98, 168)
    rr = rng.randint(14, 26)
    sat = rng.randint(88, 99)
    return (f"Vitals: T {temp} HR {hr} BP {sbp}/{rng.randint(55, 95)} "
            f"RR {rr} O2 sat {sat}% on room air.\n"
            "General: alert, oriented, no acute distress.\n"
            f"Exam notable for {rng.choice(cond[3])}.")


def results(rng, cond):
    lines = [f"WBC {round(rng.uniform(4.0, 18.0), 1)} Hgb "
             f"{round(rng.uniform(7.5, 15.0), 1)} Plt {rng.randint(120, 420)}",
             f"Creatinine {round(rng.uniform(0.6, 3.4), 1)} "
             f"BUN {rng.randint(8, 60)}"]
    for test in cond[4]:
        lines.append(f"{test}: " + rng.choice(
            ["abnormal, see hospital course.", "within normal limits.",
             "pending at discharge."]))
    return "\n".join(lines)


def course(rng, cond, comorbid):
    meds = " and ".join(cond[5])
    text = (f"The patient was admitted with {cond[0]} and treated with {meds}. "
            f"Symptoms improved over the hospital stay. ")
    for name, _, med in comorbid:
        text += f"# {name.capitalize()}: continued home {med}. "
    text += rng.choice([
        "Physical therapy evaluated the patient prior to discharge.",
        "The patient was tolerating a regular diet at discharge.",
        "Social work was consulted for discharge planning.",
    ])
    return text


def note(rng, note_id):
    cond = rng.choice(CONDITIONS)
    comorbid = rng.sample(COMORBIDITIES, rng.randint(0, 3))
    sex = rng.choice(["F", "M"])
    age = rng.randint(34, 91)
    home_meds = [c[2] for c in comorbid]
    discharge_meds = home_meds + [m for m in cond[5] if m != "intravenous fluids"]
    parts = [
        "Name:  ___                 Unit No:   ___",
        "Admission Date:  ___              Discharge Date:   ___",
        "Date of Birth:  ___             Sex:   " + sex,
        "Service: " + rng.choice(SERVICES),
        "Allergies:\n" + rng.choice(ALLERGIES),
        "Attending: ___",
        "Chief Complaint:\n" + cond[2][0],
        "Major Surgical or Invasive Procedure:\n" +
        rng.choice(["None", "None", "Upper endoscopy", "Central line placement"]),
        "History of Present Illness:\n" + hpi(rng, age, sex, cond, comorbid),
    ]
    if rng.random() < 0.4:
        parts.append("Review of Systems:\nNegative except as noted in the "
                     "history of present illness.")
    parts += [
        "Past Medical History:\n" + ("\n".join(
            "- " + c[0] for c in comorbid) or "None"),
        "Social History:\n" + rng.choice(SOCIAL),
    ]
    if rng.random() < 0.7:
        parts.append("Family History:\n" + rng.choice(FAMILY))
    parts += [
        "Physical Exam:\n" + physical_exam(rng, cond),
        "Pertinent Results:\n" + results(rng, cond),
        "Brief Hospital Course:\n" + course(rng, cond, comorbid),
        "Medications on Admission:\n" + ("\n".join(
            f"{i + 1}. {m}" for i, m in enumerate(home_meds)) or "None"),
        "Discharge Medications:\n" + "\n".join(
            f"{i + 1}. {m}" for i, m in enumerate(discharge_meds)),
        "Discharge Disposition:\n" + rng.choice(DISPOSITIONS),
        "Discharge Diagnosis:\nPrimary: " + cond[0] + (
            "\nSecondary: " + ", ".join(c[0] for c in comorbid)
            if comorbid else ""),
        "Discharge Condition:\n" + rng.choice(CONDITIONS_AT_DISCHARGE),
        "Discharge Instructions:\nYou were admitted to the hospital for " +
        cond[0] + ". Please take your medications as prescribed and return "
        "if your symptoms worsen.",
        "Followup Instructions:\n___",
    ]
    labels = sorted({cond[1]} | {c[1] for c in comorbid})
    return {"id": note_id, "text": "\n".join(parts) + "\n", "labels": labels}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=20240613)
    parser.add_argument("--out", type=pathlib.Path,
                        default=pathlib.Path(__file__).resolve().parent.parent /
                        "data" / "toy")
    args = parser.parse_args()
    rng = random.Random(args.seed)
    args.out.mkdir(parents=True, exist_ok=True)
    for name, prefix, count in [("public", "pub", 60),
                                ("private_train", "trn", 30),
                                ("private_test", "tst", 10)]:
        with open(args.out / f"{name}.jsonl", "w", encoding="utf-8",
                  newline="\n") as f:
            for i in range(count):
                record = note(rng, f"{prefix}-{i:03d}")
                f.write(json.dumps(record, ensure_ascii=False) + "\n")


if __name__ == "__main__":
    main()
