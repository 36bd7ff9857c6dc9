//! Benchmark programs in their equality variants, and the harness that
//! times them and reports search statistics as TSV.

use std::fmt;
use std::io::Write;
use std::time::Instant;

use crate::engine::Engine;
use crate::error::EvalError;
use crate::eval::MachineOptions;
use crate::search::{SearchError, SearchStats};

pub const HEADER: &str = "benchmark\tmode\ttime_ms\tchoices\tfailures\tguards\tforces";

/// Reduction budget per benchmark run; exceeding it is reported as a
/// timeout.
pub const STEP_BUDGET: u64 = 50_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Boolean equality, required to be `True`.
    Equal,
    Strict,
    Lazy,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Equal => "==",
            Mode::Strict => "=:=",
            Mode::Lazy => "=:<=",
        })
    }
}

/// The constraint `pat = val` in the given mode; `pat` is the pattern side
/// for lazy unification.
fn eq(mode: Mode, pat: &str, val: &str) -> String {
    match mode {
        Mode::Equal => format!("({pat} == {val}) =:= True"),
        Mode::Strict => format!("{pat} =:= {val}"),
        Mode::Lazy => format!("{pat} =:<= {val}"),
    }
}

pub struct Benchmark {
    pub name: &'static str,
    pub modes: &'static [Mode],
    source: fn(Mode) -> String,
    query: fn(u32) -> String,
}

impl Benchmark {
    pub fn source(&self, mode: Mode) -> String {
        (self.source)(mode)
    }

    pub fn query(&self, scale: u32) -> String {
        (self.query)(scale)
    }
}

const ALL: &[Mode] = &[Mode::Equal, Mode::Strict, Mode::Lazy];
const NO_LAZY: &[Mode] = &[Mode::Equal, Mode::Strict];

fn bools(n: usize, f: impl Fn(usize) -> bool) -> String {
    let items: Vec<&str> = (0..n).map(|i| if f(i) { "True" } else { "False" }).collect();
    format!("[{}]", items.join(", "))
}

pub fn last_source(mode: Mode) -> String {
    format!(
        "last :: [Nat] -> Nat\nlast xs | {} = e where ys :: [Nat], e :: Nat free\n",
        eq(mode, "ys ++ [e]", "xs")
    )
}

fn half_source(mode: Mode) -> String {
    format!("half :: Nat -> Nat\nhalf y | {} = x where x :: Nat free\n", eq(mode, "x + x", "y"))
}

fn palindrome_source(mode: Mode) -> String {
    format!(
        "palindrome :: [Bool] -> Bool\n\
         palindrome zs | {} = True where xs :: [Bool] free\n\
         palindrome zs | {} = True where xs :: [Bool], y :: Bool free\n",
        eq(mode, "xs ++ reverse xs", "zs"),
        eq(mode, "xs ++ [y] ++ reverse xs", "zs")
    )
}

fn fstdup_source(mode: Mode) -> String {
    format!(
        "fstDup :: [Bool] -> Bool\n\
         fstDup xs | {} & elem e ys =:= True & nub ys =:= ys = e where ys, zs :: [Bool], e :: Bool free\n",
        eq(mode, "ys ++ [e] ++ zs", "xs")
    )
}

fn horseman_source(mode: Mode) -> String {
    format!(
        "horseman :: Nat -> Nat -> Nat -> Nat -> Success\n\
         horseman m h heads feet = {} & {}\n",
        eq(mode, "m + h", "heads"),
        eq(mode, "(m + m) + ((h + h) + (h + h))", "feet")
    )
}

fn grep_source(mode: Mode) -> String {
    format!(
        "data RE = Lit Bool | Alt RE RE | Conc RE RE | Star RE\n\
         sem :: RE -> [Bool]\n\
         sem (Lit c) = [c]\n\
         sem (Alt a b) = sem a ? sem b\n\
         sem (Conc a b) = sem a ++ sem b\n\
         sem (Star a) = [] ? sem (Conc a (Star a))\n\
         grep :: RE -> [Bool] -> Success\n\
         grep r s = {} where xs, ys :: [Bool] free\n",
        eq(mode, "xs ++ sem r ++ ys", "s")
    )
}

fn simplify_source(mode: Mode) -> String {
    let rules = [
        ("Add (Num 0) x", "x"),
        ("Add x (Num 0)", "x"),
        ("Mul (Num 1) x", "x"),
        ("Mul x (Num 1)", "x"),
        ("Mul (Num 0) x", "Num 0"),
    ];
    let mut src = String::from("data Exp = Num Nat | X | Add Exp Exp | Mul Exp Exp\nsimp :: Exp -> Exp\n");
    for (pat, rhs) in rules {
        src += &format!("simp e | {} = {rhs} where x :: Exp free\n", eq(mode, pat, "e"));
    }
    src += "step :: Exp -> Exp\n\
            step e = simp e\n\
            step (Add a b) = Add (step a) b ? Add a (step b)\n\
            step (Mul a b) = Mul (step a) b ? Mul a (step b)\n";
    src
}

fn varinexp_source(mode: Mode) -> String {
    format!(
        "data Exp = Lit Nat | V Nat | Add Exp Exp | Mul Exp Exp\n\
         sub :: Exp -> Exp\n\
         sub e = e\n\
         sub (Add a b) = sub a ? sub b\n\
         sub (Mul a b) = sub a ? sub b\n\
         varInExp :: Exp -> Nat\n\
         varInExp e | {} = v where v :: Nat free\n",
        eq(mode, "V v", "sub e")
    )
}

fn nested(k: u32, leaf: &str, wrap: impl Fn(String, u32) -> String) -> String {
    (0..k).fold(leaf.to_string(), |acc, i| wrap(acc, i))
}

pub static BENCHMARKS: &[Benchmark] = &[
    Benchmark {
        name: "last",
        modes: ALL,
        source: last_source,
        query: |k| format!("last (map (inc 0) (fromTo 1 {}))", 100 * k),
    },
    Benchmark {
        name: "half",
        modes: ALL,
        source: half_source,
        query: |k| format!("half {}", 20 * k),
    },
    Benchmark {
        name: "palindrome",
        modes: ALL,
        source: palindrome_source,
        query: |k| {
            let n = 6 * k as usize;
            format!("palindrome {}", bools(2 * n, |i| (i.min(2 * n - 1 - i)) % 3 == 0))
        },
    },
    Benchmark {
        name: "fstDup",
        modes: ALL,
        source: fstdup_source,
        query: |k| {
            let n = 3 * k as usize;
            format!("fstDup {}", bools(n + 1, |i| i == n || i == n - 1))
        },
    },
    Benchmark {
        name: "horseman",
        modes: NO_LAZY,
        source: horseman_source,
        query: |k| format!("horseman m h {} {} where m, h :: Nat free", 10 * k, 26 * k),
    },
    Benchmark {
        name: "grep-small",
        modes: NO_LAZY,
        source: grep_source,
        query: |k| {
            let n = 8 * k as usize;
            format!("grep (Conc (Lit True) (Star (Lit False))) {}", bools(n, |i| i % 3 == 0))
        },
    },
    Benchmark {
        name: "simplify-small",
        modes: ALL,
        source: simplify_source,
        query: |k| {
            let e = nested(k, "X", |acc, i| {
                if i % 2 == 0 {
                    format!("Add (Mul (Num 1) ({acc})) (Num 0)")
                } else {
                    format!("Mul ({acc}) (Add (Num 0) X)")
                }
            });
            format!("step ({e})")
        },
    },
    Benchmark {
        name: "varInExp-small",
        modes: ALL,
        source: varinexp_source,
        query: |k| {
            let e = nested(4 * k, "Lit 0", |acc, i| {
                if i % 2 == 0 {
                    format!("Add (V {i}) ({acc})")
                } else {
                    format!("Mul ({acc}) (Lit {i})")
                }
            });
            format!("varInExp ({e})")
        },
    },
];

/// `last'` on a list whose first element fails: only lazy unification
/// succeeds.
pub static LAST_FAILING_HEAD: Benchmark = Benchmark {
    name: "last-failhead",
    modes: &[Mode::Strict, Mode::Lazy],
    source: |mode| {
        format!(
            "last :: [Bool] -> Bool\nlast xs | {} = e where ys :: [Bool], e :: Bool free\n",
            eq(mode, "ys ++ [e]", "xs")
        )
    },
    query: |_| "last [failed, True]".to_string(),
};

pub fn benchmark(name: &str) -> Option<&'static Benchmark> {
    BENCHMARKS.iter().chain([&LAST_FAILING_HEAD]).find(|b| b.name == name)
}

#[derive(Clone, Debug)]
pub struct Row {
    pub benchmark: &'static str,
    pub mode: Mode,
    /// `None` when the step budget ran out.
    pub time_ms: Option<f64>,
    pub stats: SearchStats,
    pub results: usize,
}

impl fmt::Display for Row {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let time = match self.time_ms {
            Some(t) => format!("{t:.2}"),
            None => "timeout".to_string(),
        };
        let s = &self.stats;
        write!(
            f,
            "{}\t{}\t{time}\t{}\t{}\t{}\t{}",
            self.benchmark, self.mode, s.choices, s.failures, s.guards, s.forces
        )
    }
}

/// Runs all results of one benchmark by depth-first search.
pub fn measure(b: &'static Benchmark, mode: Mode, scale: u32, steps: u64) -> Result<Row, String> {
    let engine = Engine::load(&b.source(mode), true).map_err(|e| format!("{} ({mode}): {e}", b.name))?;
    let opts = MachineOptions {
        step_limit: Some(steps),
        ..MachineOptions::default()
    };
    let start = Instant::now();
    let session = engine.session(&b.query(scale), None, opts).map_err(|e| e.to_string())?;
    let mut run = session.run(&engine.registry, "dfs").map_err(|e| e.to_string())?;
    let mut results = 0;
    let mut timed_out = false;
    for r in run.by_ref() {
        match r {
            Ok(_) => results += 1,
            Err(SearchError::Eval(EvalError::StepLimit(_))) => timed_out = true,
            Err(e) => return Err(format!("{} ({mode}): {e}", b.name)),
        }
    }
    let elapsed = start.elapsed().as_secs_f64() * 1000.0;
    Ok(Row {
        benchmark: b.name,
        mode,
        time_ms: (!timed_out).then_some(elapsed),
        stats: run.stats(),
        results,
    })
}

fn suite(name: &str) -> Option<Vec<(&'static Benchmark, Vec<Mode>)>> {
    let pick = |modes: &[Mode]| -> Vec<(&'static Benchmark, Vec<Mode>)> {
        BENCHMARKS
            .iter()
            .map(|b| (b, b.modes.iter().copied().filter(|m| modes.contains(m)).collect::<Vec<_>>()))
            .filter(|(_, ms)| !ms.is_empty())
            .collect()
    };
    match name {
        "equations" => Some(pick(ALL)),
        "unify" => Some(pick(&[Mode::Strict])),
        "funpat" => {
            let mut v = pick(&[Mode::Lazy]);
            v.push((&LAST_FAILING_HEAD, LAST_FAILING_HEAD.modes.to_vec()));
            Some(v)
        }
        _ => None,
    }
}

/// The rows' ordering claims, one `#` line each. Absolute times are not
/// compared.
fn checks(rows: &[Row]) -> Vec<String> {
    let find = |b: &str, m: Mode| rows.iter().find(|r| r.benchmark == b && r.mode == m);
    let mut out = Vec::new();
    if let (Some(e), Some(s), Some(l)) = (find("last", Mode::Equal), find("last", Mode::Strict), find("last", Mode::Lazy)) {
        let (e, s, l) = (e.stats.choices, s.stats.choices, l.stats.choices);
        let ok = e > s && s >= l && e >= 10 * s;
        out.push(format!(
            "# last: choices == {e} > =:= {s} >= =:<= {l}, ratio >= 10: {}",
            if ok { "ok" } else { "FAILED" }
        ));
    }
    if let (Some(s), Some(l)) = (find(LAST_FAILING_HEAD.name, Mode::Strict), find(LAST_FAILING_HEAD.name, Mode::Lazy)) {
        let ok = s.results == 0 && l.results == 1;
        out.push(format!(
            "# last-failhead: results =:= {} and =:<= {}: {}",
            s.results,
            l.results,
            if ok { "ok" } else { "FAILED" }
        ));
    }
    out
}

pub fn run_suite(name: &str, scale: u32, out: &mut impl Write) -> Result<(), String> {
    let entries = suite(name).ok_or_else(|| format!("unknown suite `{name}` (available: equations, unify, funpat)"))?;
    let io = |e: std::io::Error| e.to_string();
    writeln!(out, "{HEADER}").map_err(io)?;
    if scale == 0 {
        return Ok(());
    }
    let mut rows = Vec::new();
    for (b, modes) in entries {
        for mode in modes {
            let row = measure(b, mode, scale, STEP_BUDGET)?;
            writeln!(out, "{row}").map_err(io)?;
            out.flush().map_err(io)?;
            rows.push(row);
        }
    }
    writeln!(out, "# times are wall-clock milliseconds on this machine; only orderings are checked").map_err(io)?;
    for line in checks(&rows) {
        writeln!(out, "{line}").map_err(io)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sources_compile() {
        for b in BENCHMARKS.iter().chain([&LAST_FAILING_HEAD]) {
            for &m in b.modes {
                Engine::load(&b.source(m), true).unwrap_or_else(|e| panic!("{} {m}: {e}", b.name));
            }
        }
    }

    #[test]
    fn scale_zero_prints_header_only() {
        let mut out = Vec::new();
        run_suite("equations", 0, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), format!("{HEADER}\n"));
        assert!(run_suite("nope", 1, &mut Vec::new()).is_err());
    }
}
