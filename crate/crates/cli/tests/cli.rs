use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "core", "data", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn relbn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relbn")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn sarco(extra: &[&str]) -> Vec<String> {
    let mut v = vec![
        "--relation".to_string(),
        data("sarcophagal.csv"),
        "--domains".into(),
        data("sarcophagal.domains"),
        "--deps".into(),
        data("sarcophagal.deps"),
    ];
    v.extend(extra.iter().map(|s| s.to_string()));
    v
}

fn run(cmd: &str, args: &[String]) -> Output {
    let mut all = vec![cmd];
    all.extend(args.iter().map(String::as_str));
    relbn(&all)
}

#[test]
fn decompose_4nf_lists_six_schemes() {
    let o = run("decompose-4nf", &sarco(&[]));
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with(
        "R1 u1,u2,u3,u7\nR2 u3,u4,u5,u8\nR3 u6,u7,u8,u9\nR4 u3,u7,u8,u10\nR5 u9,u10,u11\nR6 u1,u2,u3,u4,u5,u6 key\n"
    ));
    assert!(text.contains("lossless_join yes\n"));
    assert!(text.contains("preserves_fds yes\n"));
}

#[test]
fn acyclic_check() {
    let o = relbn(&["check", "acyclic", "--hyperedges", &data("cliques.hyper")]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "acyclic\n");
}

#[test]
fn dependency_checks() {
    let cancer = |kind: &str, lhs: &str, rhs: &str| {
        stdout(&relbn(&[
            "check",
            kind,
            "--relation",
            &data("cancer.csv"),
            "--domains",
            &data("cancer.domains"),
            "--lhs",
            lhs,
            "--rhs",
            rhs,
        ]))
    };
    assert_eq!(cancer("pd", "B,C", "D"), "holds\n");
    assert_eq!(cancer("pd", "A", "B"), "fails\n");
    assert_eq!(cancer("fd", "A", "B"), "fails\n");
    let o = run("check", &{
        let mut v = vec!["lossless-join".to_string()];
        v.extend(sarco(&[]));
        v
    });
    assert_eq!(stdout(&o), "lossless\n");
    let o = run("check", &{
        let mut v = vec!["preserves".to_string()];
        v.extend(sarco(&[]));
        v
    });
    assert_eq!(stdout(&o), "preserved\n");
}

#[test]
fn infer_recall_matches_point_masses() {
    let o = run("infer", &sarco(&["--evidence", &data("recall.evidence")]));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.starts_with("engine clique-propagation\n"));
    for line in [
        "  5 1,-1,1 1\n",
        "  a 1,-1,1,-1 1\n",
        "  5 -1,1,-1,1 1\n",
        "  14 1,1,-1,-1 1\n",
        "  1d 1,1,1,1 1\n",
        "  20 1,-1,-1,-1 0.500000000\n  22 1,-1,0,-1 0.500000000\n",
    ] {
        assert!(text.contains(line), "missing {line:?} in\n{text}");
    }
}

#[test]
fn oracle_pins_u5() {
    let o = run(
        "oracle-infer",
        &sarco(&["--evidence", &data("recall.evidence"), "--target", "u5"]),
    );
    assert_eq!(stdout(&o), "engine universal-oracle\ntarget u5\n  -1 0\n  0 1\n  1 0\n");
}

#[test]
fn learn_nnor_reports_formulas() {
    let o = run("learn", &sarco(&["--method", "nnor", "--binary-slice"]));
    let text = stdout(&o);
    assert!(text.contains("formula u7=1 u1~u2 + u1u3 + ~u2u3 complexity 5\n"));
    assert!(text.contains("formula u8=1 u4 + u3u5 complexity 2\n"));
    assert!(text.contains("  (-1,1,-1) -1:0 1:1 or-fill\n"));
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let args = sarco(&["--optimizer", "anneal", "--seed", "11"]);
    let a = run("decompose-bn", &args);
    let b = run("decompose-bn", &args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).contains("total_states 124\nnetwork_states 4608\n"));
}

#[test]
fn reproduce_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tables.txt");
    let o = relbn(&["reproduce", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    let file = std::fs::read_to_string(&path).unwrap();
    assert_eq!(file, stdout(&relbn(&["reproduce"])));
    assert!(file.contains("== assignments for the unseen cells"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ev = dir.path().join("bad.evidence");
    std::fs::write(&ev, "u1=1\nu2=-1\nu3=-1\nu7=-1\n").unwrap();
    let o = run("oracle-infer", &sarco(&["--evidence", ev.to_str().unwrap()]));
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.starts_with("error: incompatible evidence"), "{err}");
    assert_eq!(err.lines().count(), 1);

    std::fs::write(&ev, "u1=2\n").unwrap();
    let o = run("infer", &sarco(&["--evidence", ev.to_str().unwrap()]));
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("u1"));

    assert_eq!(relbn(&["infer", "--nonsense"]).status.code(), Some(2));
    assert_eq!(relbn(&["check", "fd"]).status.code(), Some(2));
    assert_eq!(run("infer", &sarco(&["--tolerance", "0"])).status.code(), Some(2));
    assert_eq!(relbn(&[]).status.code(), Some(2));
}
