use dispersive_core::model::DriveParams;
use dispersive_core::C64;
use dispersive_lab::config::{parse_family, parse_step, Config, ParamsSection, PlanSection};
use dispersive_lab::preset::{Preset, PresetName};
use dispersive_lab::report::{cell, envelope, round_sig, to_json_text};
use dispersive_lab::LabError;
use proptest::prelude::*;
use serde_json::json;

#[test]
fn presets_round_trip_through_text() {
    for preset in [Preset::squid(), Preset::ion()] {
        let text = preset.to_config().to_text();
        let back = Preset::from_config(&Config::parse(&text).unwrap()).unwrap();
        assert_eq!(back.params, preset.params);
        assert_eq!(back.g_physical, preset.g_physical);
        assert_eq!(back.lifetimes, preset.lifetimes);
        assert_eq!(back.name, PresetName::Custom);
    }
}

#[test]
fn unit_conversion_round_trips() {
    let p = Preset::squid();
    for t in [0.0, 1.0, 598.0426, 1e6] {
        assert!((p.to_units(p.to_seconds(t)) - t).abs() <= 1e-12 * t.max(1.0));
    }
    assert!((p.to_seconds(1.8e8) - 1.0).abs() < 1e-15);
}

#[test]
fn unknown_keys_and_bad_lifetimes_are_usage_errors() {
    let cases = [
        "[params]\ndelta1 = 20.0\ndelta2 = 21.0\ncolour = 3\n",
        "[params]\ndelta1 = 20.0\ndelta2 = 21.0\n[physical]\nt_c = 1e-6\n",
        "[params]\ndelta1 = 20.0\ndelta2 = 21.0\n[physical]\nt_c = 1e-6\nt_r = 1e-6\nt_d = 1e-2\n",
        "[params]\ndelta1 = 20.0\ndelta2 = 21.0\n[physical]\ng_hz = -1.0\n",
        "[physical]\ng_hz = 1.0\n",
    ];
    for text in cases {
        let r = Config::parse(text).and_then(|c| Preset::from_config(&c));
        assert!(matches!(r, Err(LabError::Usage(_))), "{text}: {r:?}");
    }
}

#[test]
fn plan_sections_parse() {
    let text = "[plan]\nn_qubits = 4\nsteps = [\"entangle 0 1\", \"lc 1\", \"cz 2 3\"]\ntarget_edges = [[0, 1], [2, 3]]\n";
    let plan = Config::parse(text).unwrap().plan.unwrap().to_plan().unwrap();
    assert_eq!(plan.n_qubits, 4);
    assert_eq!(plan.steps.len(), 3);
    assert_eq!(plan.target.edges(), vec![(0, 1), (2, 3)]);
    for bad in ["entangle", "lc", "lc x", "cz 1", "swap 0 1"] {
        assert!(parse_step(bad).is_err(), "{bad}");
    }
    assert_eq!(parse_family("grid 2 3").unwrap().n(), 6);
    assert_eq!(parse_family("cycle 5").unwrap().edge_count(), 5);
    assert!(parse_family("moebius 4").is_err());
    let missing_target = PlanSection {
        n_qubits: 2,
        steps: vec!["cz 0 1".into()],
        ..Default::default()
    };
    assert!(missing_target.to_plan().is_err());
}

#[test]
fn numbers_are_frozen_at_twelve_digits() {
    assert_eq!(round_sig(1.0 / 3.0), 0.333333333333);
    assert_eq!(round_sig(0.0), 0.0);
    assert_eq!(cell(0.5), "0.5");
    assert_eq!(cell(1.5e-6), "1.5e-6");
    assert_eq!(cell(f64::NAN), "nan");
    let v = envelope("demo", json!({ "x": 2.0f64.sqrt(), "bad": f64::NAN.to_string() }));
    let text = to_json_text(&v);
    assert!(text.contains("1.41421356237"), "{text}");
    assert!(!text.contains("1.414213562373"), "{text}");
    assert!(text.starts_with("{\n") && text.ends_with("}\n"));
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![(-1e3..1e3f64), (1e-6..1e6f64)]
}

fn drive_params() -> impl Strategy<Value = DriveParams> {
    (1usize..=4, 1.0..50.0f64, 0.1..5.0f64).prop_flat_map(|(n, d1, gap)| {
        (
            prop::collection::vec((finite(), finite()), n),
            prop::collection::vec((finite(), finite()), n),
        )
            .prop_map(move |(g, w)| {
                let c = |v: Vec<(f64, f64)>| v.into_iter().map(|(a, b)| C64::new(a, b)).collect();
                DriveParams::new(c(g), c(w), d1, d1 + gap).unwrap()
            })
    })
}

proptest! {
    #[test]
    fn params_round_trip(p in drive_params()) {
        let config = Config { params: Some(ParamsSection::from_drive_params(&p)), ..Default::default() };
        let back = Config::parse(&config.to_text()).unwrap();
        prop_assert_eq!(&back, &config);
        prop_assert_eq!(back.params.unwrap().to_drive_params().unwrap(), p);
    }

    #[test]
    fn rounding_is_idempotent_and_close(x in prop_oneof![-1e300..1e300f64, -1.0..1.0f64]) {
        let r = round_sig(x);
        prop_assert_eq!(round_sig(r), r);
        prop_assert!((r - x).abs() <= 1e-11 * x.abs());
    }
}
