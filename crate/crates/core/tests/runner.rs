use std::path::PathBuf;

use bubblelab::barebones::{self, BareBonesParams};
use bubblelab::runner::models::run_all;
use bubblelab::runner::scenario::Output;
use bubblelab::runner::{
    parse_scenario, parse_scenarios, run_scenario, serialize_scenario, Column, Model, ParamValue,
    Scenario, Sweep,
};
use bubblelab::Execution;
use proptest::prelude::*;

fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn figures() -> Vec<Scenario> {
    let text = std::fs::read_to_string(manifest_dir().join("scenarios/figures.ini")).unwrap();
    parse_scenarios(&text).unwrap()
}

#[test]
fn figure_outputs_match_golden_files() {
    let golden = manifest_dir().join("tests/golden");
    for s in figures() {
        let art = run_scenario(&s, Execution::default()).unwrap();
        for (name, contents) in &art.files {
            if !name.ends_with(".csv") {
                continue;
            }
            let expected = std::fs::read_to_string(golden.join(name)).unwrap();
            assert_eq!(contents, &expected, "{name} differs from golden");
        }
    }
}

#[test]
fn figure_suite_writes_identical_bytes_twice() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let s = figures();
    run_all(&s, a.path(), Execution::Parallel).unwrap();
    run_all(&s, b.path(), Execution::Sequential).unwrap();
    let mut names: Vec<_> = std::fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert_eq!(names.len(), 9);
    for n in names {
        let x = std::fs::read(a.path().join(&n)).unwrap();
        let y = std::fs::read(b.path().join(&n)).unwrap();
        assert_eq!(x, y, "{n:?}");
    }
}

#[test]
fn fig1_prices_follow_the_closed_form() {
    for s in figures().iter().filter(|s| s.name.starts_with("fig1")) {
        let art = run_scenario(s, Execution::Sequential).unwrap();
        let path = art.path.unwrap();
        let a = match s.params["A"] {
            ParamValue::Number(a) => a,
            _ => unreachable!(),
        };
        // oracle: P_t = rho^t P0 + c D (rho^t - 1)/(rho - 1)
        let (beta, pi, delta) = (0.95_f64, 0.1_f64, 0.08_f64);
        let rho = beta * pi * (a + 1.0 - delta) / (1.0 - beta + beta * pi);
        let c = beta * (1.0 - pi) / (1.0 - beta + beta * pi);
        assert_eq!(path.len(), 51);
        for (t, p) in path.price.iter().enumerate() {
            let rt = rho.powi(t as i32);
            let want = rt * 5.0 + c * (rt - 1.0) / (rho - 1.0);
            assert!((p - want).abs() <= 1e-10 * want, "{} t={t}: {p} vs {want}", s.name);
        }
    }
}

#[test]
fn wealth_start_matches_simulate_forward() {
    let text = "[w]\nmodel = barebones\npi = 0.1\nbeta = 0.95\ndelta = 0.08\nD = 1\nA = 0.7\nw0 = 20\nhorizon = 60\n";
    let s = parse_scenario(text).unwrap();
    let art = run_scenario(&s, Execution::Sequential).unwrap();
    let direct = barebones::simulate_forward(&BareBonesParams::baseline(0.7), 20.0, 60).unwrap();
    assert_eq!(art.path.as_ref().unwrap(), &direct);
    let header = art.file("w.csv").unwrap().lines().next().unwrap();
    assert_eq!(header, "t,P,D,R,W,K,phi,price_rent,yield");
}

#[test]
fn fig2_sweep_has_200_rows() {
    let s = figures().into_iter().find(|s| s.name == "fig2").unwrap();
    let art = run_scenario(&s, Execution::default()).unwrap();
    let csv = art.file("fig2_sweep.csv").unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 201);
    assert_eq!(rows[0], "A,longrun_rate,regime");
    assert!(rows[200].starts_with("1,"));
    assert!(rows[200].ends_with(",bubbly_unbalanced"));
}

#[test]
fn valuation_columns_need_truncation() {
    let base = "[v]\nmodel = barebones\npi = 0.1\nbeta = 0.95\ndelta = 0.08\nD = 1\nA = 0.7\nw0 = 20\nhorizon = 400\ncolumns = [t, P, V, bubble]\n";
    let s = parse_scenario(base).unwrap();
    let err = run_scenario(&s, Execution::Sequential).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("truncation"), "{err}");

    let s = parse_scenario(&format!("{base}truncation = 200\n")).unwrap();
    let art = run_scenario(&s, Execution::Sequential).unwrap();
    let csv = art.file("v.csv").unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 402);
    // valued rows carry V and bubble, the rest are blank
    assert!(!lines[1].ends_with(",,"));
    assert!(lines[401].ends_with(",,"));
    assert!(art.file("v_summary.txt").unwrap().contains("valuation_verdict = bubbly\n"));
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        -1e6..1e6_f64,
        (-300i32..300).prop_map(|e| 1.2345678901234567 * 10f64.powi(e)),
    ]
}

fn barebones_scenario() -> impl Strategy<Value = Scenario> {
    (
        (0.01..0.99_f64, 0.5..0.99_f64, 0.0..1.0_f64, 0.0..2.0_f64, 0.1..5.0_f64),
        prop::option::of(0.5..3.0_f64),
        (1usize..5000, prop::option::of(any::<u64>())),
        prop::option::of(prop::sample::subsequence(Column::ALL.to_vec(), 1..6)),
        prop::option::of(100usize..1000),
    )
        .prop_map(|((pi, beta, delta, a, d), x, (horizon, seed), columns, truncation)| {
            let mut params = std::collections::BTreeMap::new();
            for (k, v) in [("pi", pi), ("beta", beta), ("delta", delta), ("A", a), ("D", d)] {
                params.insert(k.to_string(), ParamValue::Number(v));
            }
            if let Some(x) = x {
                params.insert("X".into(), ParamValue::Number(x));
            }
            Scenario {
                name: "s".into(),
                model: Model::Barebones,
                params,
                horizon,
                seed,
                outputs: vec![Output::PathCsv, Output::Summary],
                columns,
                truncation,
                sweep: None,
            }
        })
}

fn wilson_scenario() -> impl Strategy<Value = Scenario> {
    (
        0.05..0.95_f64,
        prop::collection::vec(0.1..10.0_f64, 1..20),
        prop::collection::vec(1e-3..1.0_f64, 1..20),
        prop::collection::vec(finite(), 2..6),
    )
        .prop_map(|(beta, a, d, mut grid)| {
            grid.sort_by(|x, y| x.partial_cmp(y).unwrap());
            grid.dedup();
            let mut params = std::collections::BTreeMap::new();
            params.insert("beta".to_string(), ParamValue::Number(beta));
            params.insert("a".to_string(), ParamValue::List(a));
            params.insert("D".to_string(), ParamValue::List(d));
            let sweep = (grid.len() >= 2).then(|| Sweep {
                param: "beta".into(),
                grid,
                stats: vec!["yield_series".into()],
            });
            Scenario {
                name: "w-1.b".into(),
                model: Model::Wilson,
                params,
                horizon: 100,
                seed: None,
                outputs: if sweep.is_some() {
                    vec![Output::Sweep]
                } else {
                    vec![Output::Summary]
                },
                columns: None,
                truncation: None,
                sweep,
            }
        })
}

proptest! {
    #[test]
    fn parse_inverts_serialize(s in prop_oneof![barebones_scenario(), wilson_scenario()]) {
        let text = serialize_scenario(&s);
        let back = parse_scenario(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(back, s);
    }
}
