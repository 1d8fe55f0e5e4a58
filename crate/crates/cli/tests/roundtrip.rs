use pelletctl::{emit_scenario, evaluate, parse_scenario};
use pelletctl_core::{
    ActuatorMode, ActuatorSpec, ControllerSpec, PlantParams, ScenarioF64, Variant,
};
use proptest::prelude::*;

fn scenario() -> impl Strategy<Value = ScenarioF64> {
    (
        (0.01f64..1.0, 1e18f64..1e21, 0.01f64..0.99),
        (1e-4f64..0.05, 0.0f64..0.1, any::<bool>()),
        (prop::sample::select(Variant::ALL.to_vec()), 1e-3f64..1e20),
        (-3.0f64..=1.0, 0.0f64..1e18, 1e-3f64..10.0, 1u32..50),
    )
        .prop_map(
            |((tau, r, frac), (t_c, prep, gas), (variant, delta), (x_frac, xi0, t_end, spt))| {
                let mode = if gas {
                    ActuatorMode::GasGun
                } else {
                    ActuatorMode::Centrifuge
                };
                let t_prep = if gas { prep.max(1e-6) } else { prep };
                ScenarioF64 {
                    plant: PlantParams::new(tau, r, frac * r).unwrap(),
                    actuator: ActuatorSpec::new(t_c, t_prep, mode).unwrap(),
                    controller: ControllerSpec::new(variant, delta).unwrap(),
                    x0: x_frac * r,
                    xi0,
                    t_end,
                    samples_per_tick: spt,
                }
            },
        )
}

proptest! {
    #[test]
    fn emit_then_parse_is_identity(s in scenario()) {
        prop_assert_eq!(parse_scenario(&emit_scenario(&s)).unwrap(), s);
    }
}

#[test]
fn summary_embeds_certificate_when_infeasible() {
    let text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/sdm_windup.json"
    ))
    .unwrap();
    let s = parse_scenario(&text).unwrap();
    let out = evaluate(&s, 0.5).unwrap();
    let json = serde_json::to_value(&out.summary).unwrap();
    assert_eq!(json["certificate"]["feasible"], false);
    assert!(json["certificate"]["tc_max"].as_f64().is_some());
}

#[test]
fn shipped_scenarios_parse() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("examples");
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            let text = std::fs::read_to_string(&path).unwrap();
            parse_scenario(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            n += 1;
        }
    }
    assert!(n >= 7);
}
