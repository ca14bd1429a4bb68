use approx::assert_relative_eq;

use dss_bva::bva::{derive_suite, DerivationConfig, Form};
use dss_bva::config::Config;
use dss_bva::kinematics::{dss_absolute, dss_relative, EnvConstants};

#[test]
fn derived_cases_re_evaluate_exactly() {
    for form in [Form::Relative, Form::Absolute] {
        let config = DerivationConfig {
            form,
            ..DerivationConfig::default()
        };
        let suite = derive_suite(&config).unwrap();
        for c in &suite.cases {
            let dss = match c.absolute {
                Some(a) => dss_absolute(&a, &config.env).unwrap().dss,
                None => dss_relative(&c.params, &config.env).unwrap().dss,
            };
            assert!(
                (dss - c.expected_dss).abs() <= 1e-12,
                "{}: {dss} vs {}",
                c.id,
                c.expected_dss
            );
        }
    }
}

#[test]
fn suite_survives_json() {
    let suite = derive_suite(&DerivationConfig::default()).unwrap();
    let text = serde_json::to_string(&suite).unwrap();
    let back: serde_json::Value = serde_json::from_str(&text).unwrap();
    for (c, v) in suite.cases.iter().zip(back["cases"].as_array().unwrap()) {
        let params = serde_json::from_value(v["params"].clone()).unwrap();
        let dss = dss_relative(&params, &EnvConstants::default()).unwrap().dss;
        assert_eq!(dss, c.expected_dss);
    }
}

#[test]
fn kmh_config_converts_to_si() {
    let kmh = Config::parse(
        r#"{"scenario": {"relative": {"d_V": 42.56, "delta_v": -20, "t_BR": 0.7, "v_L": 100, "units": "kmh"}}}"#,
    )
    .unwrap();
    let si = Config::parse(
        r#"{"scenario": {"relative": {"d_V": 42.56, "delta_v": -5.555555555555555, "t_BR": 0.7, "v_L": 27.77777777777778}}}"#,
    )
    .unwrap();
    let a = dss_relative(&kmh.relative(), &kmh.env).unwrap();
    let b = dss_relative(&si.relative(), &si.env).unwrap();
    assert_relative_eq!(a.dss, b.dss, max_relative = 1e-12);
    assert_relative_eq!(
        kmh.relative().follower_speed(),
        120.0 / 3.6,
        max_relative = 1e-12
    );
}

#[test]
fn absolute_config_matches_relative() {
    let abs = Config::parse(
        r#"{"scenario": {"absolute": {"x_L": 47.56, "x_F": 0, "v_L": 27.7778, "v_F": 33.3334, "t_BR": 0.7}}}"#,
    )
    .unwrap();
    let rel = Config::parse(
        r#"{"scenario": {"relative": {"d_V": 42.56, "delta_v": -5.5556, "t_BR": 0.7}}}"#,
    )
    .unwrap();
    let a = dss_relative(&abs.relative(), &abs.env).unwrap().dss;
    let b = dss_relative(&rel.relative(), &rel.env).unwrap().dss;
    assert!((a - b).abs() < 1e-12);
}
