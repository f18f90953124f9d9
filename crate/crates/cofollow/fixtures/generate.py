#!/usr/bin/env python3
"""Writes the bundled fixture: 30 institutions in three planted groups,
500 followers who mostly follow within one group, and descriptions drawn
from a per-group vocabulary. Output is fully determined by SEED."""

import csv
import json
import random
from pathlib import Path

SEED = 20201
HERE = Path(__file__).resolve().parent

POOLS = [
    ["football", "soccer", "fan", "team", "game", "sport"],
    ["teacher", "student", "school", "education", "learning", "coach"],
    ["music", "art", "artist", "photography", "design", "film"],
]
FILLER = ["the", "and", "of", "my", "a", "i", "love", "life", "proud", "mom", "dog"]
STATES = ["CA", "NY", "TX", "GA", "OH"]


def institutions(rng):
    rows = []
    for i in range(30):
        g = i // 10
        uid = f"u{i + 1:02d}"
        if g == 0:
            kind, religious, race = "Public", "Secular", "None"
            enrollment = rng.randint(15000, 45000)
            tuition = rng.randint(9000, 14000)
        elif g == 1:
            kind, religious, race = "Private", rng.choice(["Christian", "Christian", "Secular"]), "None"
            enrollment = rng.randint(1500, 6000)
            tuition = rng.randint(35000, 55000)
        else:
            kind = rng.choice(["Public", "Private", "CommunityCollege"])
            religious = "Secular"
            race = "HBCU" if i % 2 == 0 else "None"
            enrollment = rng.randint(2000, 12000)
            tuition = rng.randint(5000, 20000)
        rows.append(
            {
                "id": uid,
                "handle": f"uni{i + 1:02d}",
                "state": rng.choice(STATES),
                "type": kind,
                "religious": religious,
                "online": rng.choice(["None", "None", "SomeOnline"]),
                "gender": "Coed",
                "race": race,
                "liberal_arts": int(g == 1 and rng.random() < 0.7 or rng.random() < 0.1),
                "sat_act_optional": int(rng.random() < 0.4),
                "common_app": int(rng.random() < (0.8 if g == 1 else 0.3)),
                "no_app_fee": int(rng.random() < 0.3),
                "enrollment": enrollment,
                "tuition": "" if i == 27 else tuition,
                "account_age": round(rng.uniform(4.0, 13.0), 2),
                "verified": int(rng.random() < 0.6),
                "favorites": rng.randint(100, 20000),
                "followers": 0,
                "friends": rng.randint(50, 3000),
                "posts": rng.randint(500, 40000),
            }
        )
    return rows


def followers(rng, n=500):
    lists = {f"u{i + 1:02d}": [] for i in range(30)}
    homes = {}
    for f in range(n):
        fid = f"f{f + 1:04d}"
        g = rng.choices([0, 1, 2], weights=[0.4, 0.35, 0.25])[0]
        homes[fid] = g
        k = rng.randint(1, 8)
        chosen = set()
        while len(chosen) < k:
            group = g if rng.random() < 0.8 else rng.randrange(3)
            chosen.add(group * 10 + rng.randrange(10))
        for i in sorted(chosen):
            lists[f"u{i + 1:02d}"].append(fid)
    # two institution accounts following their peers
    for peer in ["u02", "u03", "u05", "u07", "u09"]:
        lists[peer].insert(0, "uni01")
    for peer in ["u12", "u14", "u15", "u18", "u19"]:
        lists[peer].insert(0, "uni11")
    return lists, homes


def description(rng, g):
    r = rng.random()
    if r < 0.08:
        return ""
    if r < 0.11:
        return "大学のファンです よろしく"
    words = rng.sample(POOLS[g], rng.randint(3, 4))
    if rng.random() < 0.3:
        words = [w + "s" if not w.endswith("s") else w for w in words[:1]] + words[1:]
    words += rng.sample(FILLER, 2)
    rng.shuffle(words)
    text = " ".join(words)
    if rng.random() < 0.2:
        text += " https://example.org/" + str(rng.randint(1, 99))
    if rng.random() < 0.2:
        text = "@someone " + text + " #" + POOLS[g][0]
    return text.capitalize()


def main():
    rng = random.Random(SEED)
    rows = institutions(rng)
    lists, homes = followers(rng)
    for row in rows:
        n = len(lists[row["id"]])
        row["followers"] = int(n * rng.uniform(1.0, 3.0))

    with open(HERE / "institutions.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0].keys()), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)

    with open(HERE / "followers.jsonl", "w") as fh:
        for uid, fl in lists.items():
            fh.write(json.dumps({"id": uid, "followers": fl}) + "\n")

    with open(HERE / "descriptions.jsonl", "w") as fh:
        for fid in sorted(homes):
            fh.write(json.dumps({"id": fid, "description": description(rng, homes[fid])}, ensure_ascii=False) + "\n")
        fh.write(json.dumps({"id": "uni01", "description": "Official account of a public university"}) + "\n")
        fh.write(json.dumps({"id": "uni11", "description": "Official account of a private college"}) + "\n")


if __name__ == "__main__":
    main()
