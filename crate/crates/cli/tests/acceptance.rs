//! Acceptance run: one pass/fail line per criterion, with wall time against
//! its budget. Exits non-zero when any criterion fails.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use multiflag::classify::{enumerate_words, DEFAULT_CLASSIFY_TOL};
use multiflag::linalg::DEFAULT_REL_TOL;
use multiflag::prolongation::DEFAULT_PUSHFORWARD_TOL;
use multiflag::verify::{self, SuiteReport};

const SEED: u64 = 1;
const MS: [usize; 2] = [2, 3];
const KS: [usize; 4] = [1, 2, 3, 4];

const WORDS_3: [&str; 6] = ["RRR", "RRV", "RVR", "RVV", "RVT", "RT_0T_{01}"];

const WORDS_4: [&str; 24] = [
    "RRRR", "RRRV", "RRVR", "RRVV", "RRVT", "RRT_0T_{01}", "RVRR", "RVRV", "RVRT_{01}", "RVVR", "RVVV", "RVVT",
    "RVT_0T_{01}", "RVTR", "RVTV", "RVTT", "RVTT_{01}", "RT_0T_{01}R", "RT_0T_{01}V", "RT_0T_{01}T_1", "RT_0T_{01}T_2",
    "RT_0T_{01}T_{01}", "RT_0T_{01}T_{02}", "RT_0T_{01}T_{12}",
];

const TABLE_4: [(&str, &str); 14] = [
    ("1111", "RRRR"),
    ("1112", "RRRV"),
    ("1121", "RRVR, RRVT"),
    ("1122", "RRVV"),
    ("1123", "RRT_0T_{01}"),
    ("1211", "RVRR, RVTR, RVTT"),
    ("1212", "RVRV, RVTV"),
    ("1213", "RVRT_{01}, RVTT_{01}"),
    ("1221", "RVVR, RVVT"),
    ("1222", "RVVV"),
    ("1223", "RVT_0T_{01}"),
    ("1231", "RT_0T_{01}R, RT_0T_{01}T_1, RT_0T_{01}T_2, RT_0T_{01}T_{12}"),
    ("1232", "RT_0T_{01}V"),
    ("1233", "RT_0T_{01}T_{01}, RT_0T_{01}T_{02}"),
];

struct Outcome {
    passed: bool,
    detail: String,
}

fn golden(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn binary(args: &[&str]) -> Result<String, String> {
    let o = Command::new(env!("CARGO_BIN_EXE_multiflag")).args(args).output().map_err(|e| e.to_string())?;
    if !o.status.success() {
        return Err(format!("exit {:?}: {}", o.status.code(), String::from_utf8_lossy(&o.stderr)));
    }
    String::from_utf8(o.stdout).map_err(|e| e.to_string())
}

fn lines(words: &[&str]) -> String {
    words.iter().map(|w| format!("{w}\n")).collect()
}

fn enumeration() -> Outcome {
    let mut problems = Vec::new();
    for (k, expected, file) in [(3, &WORDS_3[..], "enumerate_3_2.txt"), (4, &WORDS_4[..], "enumerate_4_2.txt")] {
        let listed: String = match enumerate_words(k, 2) {
            Ok(ws) => ws.iter().map(|w| format!("{w}\n")).collect(),
            Err(e) => {
                problems.push(format!("k={k}: {e}"));
                continue;
            }
        };
        let gold = golden(file);
        if listed != lines(expected) {
            problems.push(format!("k={k}: word list differs from the reference list"));
        }
        if listed != gold {
            problems.push(format!("k={k}: library output differs from {file}"));
        }
        match binary(&["enumerate", &k.to_string(), "2"]) {
            Ok(out) if out == gold => {}
            Ok(_) => problems.push(format!("k={k}: CLI output differs from {file}")),
            Err(e) => problems.push(format!("k={k}: {e}")),
        }
    }
    Outcome {
        passed: problems.is_empty(),
        detail: if problems.is_empty() { "6 and 24 words, identical to golden files".into() } else { problems.join("; ") },
    }
}

fn table() -> Outcome {
    let out = match binary(&["table", "4"]) {
        Ok(o) => o,
        Err(e) => return Outcome { passed: false, detail: e },
    };
    let rows: Vec<(String, String)> = out
        .lines()
        .skip(1)
        .filter_map(|l| l.split_once(" | ").map(|(a, b)| (a.trim().to_string(), b.to_string())))
        .collect();
    let expected: Vec<(String, String)> = TABLE_4.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
    let gold = golden("table_4.txt");
    let passed = rows == expected && out == gold;
    Outcome {
        passed,
        detail: if passed {
            "14 rows match the reference table".into()
        } else {
            format!("{} rows parsed, reference match {}, golden match {}", rows.len(), rows == expected, out == gold)
        },
    }
}

fn suite(report: multiflag::Result<SuiteReport>) -> Outcome {
    match report {
        Ok(r) => Outcome {
            passed: r.passed(),
            detail: {
                let mut d = format!("{} checks, {} failures", r.checks, r.failures);
                if let Some(m) = r.messages.first() {
                    d.push_str(&format!(" (first: {m})"));
                }
                d
            },
        },
        Err(e) => Outcome { passed: false, detail: format!("error: {e}") },
    }
}

fn both(a: Outcome, b: Outcome) -> Outcome {
    Outcome { passed: a.passed && b.passed, detail: format!("{}; {}", a.detail, b.detail) }
}

fn main() -> ExitCode {
    type Check = Box<dyn Fn() -> Outcome>;
    let criteria: Vec<(&str, u64, Check)> = vec![
        ("enumeration", 1, Box::new(enumeration)),
        ("ekr-rvt table", 1, Box::new(table)),
        (
            "oracle round-trip",
            60,
            Box::new(|| suite(verify::roundtrip(&MS, 6, true, 100, SEED, DEFAULT_CLASSIFY_TOL, 0.05))),
        ),
        (
            "flag ranks and Cauchy characteristics",
            120,
            Box::new(|| {
                both(
                    suite(verify::flag_ranks(&MS, &KS, 100, SEED, DEFAULT_REL_TOL)),
                    suite(verify::cauchy(&MS, &KS, 100, SEED, DEFAULT_REL_TOL)),
                )
            }),
        ),
        (
            "prolongation pushforward",
            60,
            Box::new(|| suite(verify::prolongation(&MS, &KS, 200, SEED, DEFAULT_PUSHFORWARD_TOL))),
        ),
        ("stratum codimension", 60, Box::new(|| suite(verify::strata(&MS, 6, 50, SEED, DEFAULT_REL_TOL)))),
        ("exact identities", 30, Box::new(|| suite(verify::identities(&MS, 5, 5)))),
        ("hyperspherical agreement", 30, Box::new(|| suite(verify::hyperspherical(&MS, &KS, 200, SEED)))),
        (
            "covering invariance",
            60,
            Box::new(|| suite(verify::covering(1000, SEED, DEFAULT_CLASSIFY_TOL))),
        ),
    ];
    let mut all = true;
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(*budget);
        let passed = outcome.passed && in_time;
        all &= passed;
        println!(
            "{} criterion {}: {name}: {} [{:.2} s / {budget} s{}]",
            if passed { "PASS" } else { "FAIL" },
            i + 1,
            outcome.detail,
            elapsed.as_secs_f64(),
            if in_time { "" } else { ", over budget" },
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
