use flx::engine::Engine;
use flx::eval::MachineOptions;

fn results(src: &str, q: &str, strategy: &str) -> Vec<String> {
    let e = Engine::load(src, true).unwrap();
    let (rs, _) = e.solve(q, strategy, MachineOptions::default()).unwrap();
    rs.iter().map(|r| r.to_string()).collect()
}

#[test]
fn xor_self_yields_false_twice() {
    assert_eq!(results("", "xorSelf aBool", "dfs"), ["False", "False"]);
}

#[test]
fn residual_free_variables() {
    assert_eq!(results("", "head xs where xs :: [Bool] free", "dfs"), ["{xs = (_x2:_x3)} _x2"]);
}

#[test]
fn strict_binding() {
    assert_eq!(results("", "x =:= True where x :: Bool free", "dfs"), ["{x = True} Success"]);
    assert_eq!(
        results("", "xs =:= [True, y] where xs :: [Bool], y :: Bool free", "dfs"),
        ["{xs = [True,_x3], y = _x3} Success"]
    );
}

#[test]
fn failed_has_no_results() {
    for s in ["dfs", "bfs", "ids"] {
        assert!(results("", "failed", s).is_empty());
    }
}

use flx::search::{collect_tree, SearchTree};
use flx::value::Term;

const LAST: &str = include_str!("../corpus/last.fl");
const INFINITE: &str = include_str!("../corpus/infinite.fl");

fn budget(steps: u64) -> MachineOptions {
    MachineOptions {
        step_limit: Some(steps),
        ..MachineOptions::default()
    }
}

#[test]
fn lazy_pattern_is_less_strict() {
    assert!(results(LAST, "last [failed, True]", "dfs").is_empty());
    let e = Engine::load(LAST, true).unwrap();
    let (rs, stats) = e.solve("last' [failed, True]", "dfs", MachineOptions::default()).unwrap();
    assert_eq!(rs.len(), 1);
    assert_eq!(rs[0].value, Term::Ctor("True".into(), vec![]));
    assert_eq!(stats.forces, 1);
}

#[test]
fn fair_strategies_reach_the_right_child() {
    let e = Engine::load(INFINITE, true).unwrap();
    for s in ["bfs", "ids"] {
        let session = e.session("g", None, budget(100_000)).unwrap();
        let first = session.run(&e.registry, s).unwrap().next().unwrap().unwrap();
        assert_eq!(first.to_string(), "0", "{s}");
    }
    let session = e.session("g", None, budget(100_000)).unwrap();
    let mut run = session.run(&e.registry, "dfs").unwrap();
    assert!(matches!(run.next(), Some(Err(_))));
    assert!(run.next().is_none());
}

#[test]
fn first_results_of_infinite_spaces() {
    let e = Engine::load(INFINITE, true).unwrap();
    let session = e.session("g", None, budget(1_000_000)).unwrap();
    let rs: Vec<_> = session.run(&e.registry, "bfs").unwrap().take(5).collect();
    assert_eq!(rs.len(), 5);
    assert!(rs.iter().all(|r| r.as_ref().unwrap().to_string() == "0"));
}

#[test]
fn trees() {
    let e = Engine::load("", true).unwrap();
    let session = e.session("failed", None, MachineOptions::default()).unwrap();
    assert_eq!(collect_tree(&mut session.solver(), 10).unwrap(), SearchTree::Failure);

    let session = e.session("True ? False", None, MachineOptions::default()).unwrap();
    let mut s = session.solver();
    let t = collect_tree(&mut s, 10).unwrap();
    let SearchTree::Branch(_, l, r) = &t else { panic!("{t:?}") };
    assert!(matches!(&**l, SearchTree::Leaf(x) if x.to_string() == "True"));
    assert!(matches!(&**r, SearchTree::Leaf(x) if x.to_string() == "False"));
    assert!(s.store.is_empty());

    let e = Engine::load(INFINITE, true).unwrap();
    let session = e.session("g", None, budget(100_000)).unwrap();
    let t = collect_tree(&mut session.solver(), 4).unwrap();
    assert!(!t.is_complete());
    assert_eq!(t.leaves().len(), 4);
}

#[test]
fn tree_leaves_match_depth_first_results() {
    let e = Engine::load(include_str!("../corpus/perm.fl"), true).unwrap();
    for q in ["perm [1, 2, 3]", "sorted (perm [3, 1, 2])"] {
        let session = e.session(q, None, MachineOptions::default()).unwrap();
        let t = collect_tree(&mut session.solver(), 100).unwrap();
        let leaves: Vec<String> = t.leaves().iter().map(|r| r.to_string()).collect();
        let dfs = results(include_str!("../corpus/perm.fl"), q, "dfs");
        assert_eq!(leaves, dfs);
    }
}

#[test]
fn ids_depth_zero_window() {
    let e = Engine::load("", true).unwrap();
    let session = e.session("True", None, MachineOptions::default()).unwrap();
    let rs: Vec<_> = flx::search::Ids::new(session.solver(), 0).collect();
    assert_eq!(rs.len(), 1);
    let session = e.session("(True ? False) ? True", None, MachineOptions::default()).unwrap();
    let rs: Vec<_> = flx::search::Ids::new(session.solver(), 0).map(|r| r.unwrap().to_string()).collect();
    assert_eq!(rs, ["True", "True", "False"]);
}

#[test]
fn audited_paths_are_consistent() {
    let e = Engine::load(include_str!("../corpus/coin.fl"), true).unwrap();
    for q in ["double coin", "pair coin", "xorSelf aBool"] {
        let session = e.session(q, None, MachineOptions::default()).unwrap();
        let mut run = flx::search::Dfs::new(session.solver().with_audit());
        let n = run.by_ref().count();
        assert!(n > 0);
        use flx::search::SearchRun;
        assert_eq!(run.stats().violations, 0);
    }
}
