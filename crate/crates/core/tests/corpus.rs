use std::fs;
use std::path::PathBuf;

use flx::engine::Engine;
use flx::eval::MachineOptions;

struct Entry {
    name: String,
    src: String,
    queries: Vec<String>,
    infinite: bool,
}

fn corpus() -> Vec<Entry> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus");
    let mut out: Vec<Entry> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "fl"))
        .map(|p| {
            let src = fs::read_to_string(&p).unwrap();
            let queries = src
                .lines()
                .filter_map(|l| l.strip_prefix("-- query: "))
                .map(str::to_string)
                .collect();
            Entry {
                name: p.file_stem().unwrap().to_string_lossy().into_owned(),
                infinite: src.lines().any(|l| l.trim() == "-- infinite"),
                src,
                queries,
            }
        })
        .collect();
    out.sort_by(|a, b| a.name.cmp(&b.name));
    out
}

fn opts() -> MachineOptions {
    MachineOptions {
        step_limit: Some(5_000_000),
        ..MachineOptions::default()
    }
}

#[test]
fn strategies_agree_on_finite_programs() {
    let finite: Vec<Entry> = corpus().into_iter().filter(|e| !e.infinite).collect();
    assert!(finite.len() >= 10);
    for e in &finite {
        let engine = Engine::load(&e.src, true).unwrap_or_else(|err| panic!("{}: {err}", e.name));
        for q in &e.queries {
            let mut sets = Vec::new();
            for s in ["dfs", "bfs", "ids"] {
                let session = engine.session(q, None, opts()).unwrap();
                let mut run = session.run(&engine.registry, s).unwrap();
                let mut rs: Vec<String> = run
                    .by_ref()
                    .map(|r| r.unwrap_or_else(|err| panic!("{} `{q}` {s}: {err}", e.name)).to_string())
                    .collect();
                assert!(run.store().is_empty(), "{} `{q}` {s}: store not restored", e.name);
                rs.sort();
                sets.push(rs);
            }
            println!("{} `{q}`: {:?}", e.name, sets[0]);
            assert_eq!(sets[0], sets[1], "{} `{q}` bfs", e.name);
            assert_eq!(sets[0], sets[2], "{} `{q}` ids", e.name);
        }
    }
}
