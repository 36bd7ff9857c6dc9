use std::io::Write;
use std::process::{Command, Output, Stdio};

fn flx(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_flx"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn corpus(name: &str) -> String {
    format!("{}/../core/corpus/{name}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn run_prints_each_result() {
    let last = corpus("last.fl");
    let o = flx(&["run", &last, "-e", "xorSelf aBool"], "");
    assert_eq!(stdout(&o), "False\nFalse\n");
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn run_without_results_exits_one() {
    let o = flx(&["run", &corpus("last.fl"), "-e", "last [failed, True]"], "");
    assert_eq!(stdout(&o), "");
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn errors_exit_two() {
    let o = flx(&["run", &corpus("last.fl"), "-e", "undefinedThing"], "");
    assert_eq!(o.status.code(), Some(2));
    let o = flx(&["run", &corpus("last.fl"), "-e", "True", "--strategy", "nope"], "");
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn first_set_and_stats() {
    let last = corpus("last.fl");
    let o = flx(&["run", &last, "-e", "xorSelf aBool", "--first", "1"], "");
    assert_eq!(stdout(&o), "False\n");
    let o = flx(&["run", &last, "-e", "xorSelf aBool", "--set", "--stats"], "");
    assert_eq!(stdout(&o), "False\n");
    let err = String::from_utf8_lossy(&o.stderr);
    let line = err.lines().last().unwrap();
    let keys: Vec<&str> = line.split(' ').map(|kv| kv.split('=').next().unwrap()).collect();
    assert_eq!(keys, ["choices", "failures", "guards", "forces"], "{line}");
}

#[test]
fn lazy_last_through_the_repl() {
    let o = flx(&["repl", &corpus("last.fl")], "last' [failed, True]\n\n:set strategy bfs\nlast' [failed, True]\n");
    assert_eq!(stdout(&o), "True\nTrue\n");
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn repl_stats_reports_the_last_query() {
    let o = flx(&["repl"], "True ? False\n:stats\n");
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[..2], ["True", "False"]);
    assert!(lines[2].starts_with("choices=1 "), "{out}");
}

#[test]
fn bench_scale_zero_prints_the_header() {
    let o = flx(&["bench", "equations", "--scale", "0"], "");
    assert_eq!(stdout(&o), "benchmark\tmode\ttime_ms\tchoices\tfailures\tguards\tforces\n");
    assert_eq!(o.status.code(), Some(0));
}
