//! Built-in example models.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};

use crate::model::{ModelError, ModelSpec};

/// `(name, one-line description)` for every built-in model.
pub const BUILTIN_MODELS: &[(&str, &str)] = &[
    (
        "linear-growth",
        "g = (w1 + w1^2) v with w1 = sqrt(2) cos(pi x); shadow limit v = 0 but the mean grows like e^t",
    ),
    (
        "predator-prey",
        "f = -p u1 + b v, g = (d - a u1 - c v) v; steady state (dp/(cp+ab), pu/b)",
    ),
    ("decoupled-heat", "f = g = 0; full and shadow solutions differ only by the initial layer"),
];

fn merged(defaults: &[(&str, f64)], overrides: &BTreeMap<String, f64>) -> BTreeMap<String, f64> {
    let mut params: BTreeMap<String, f64> =
        defaults.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    params.extend(overrides.iter().map(|(k, v)| (k.clone(), *v)));
    params
}

/// Looks up a built-in model; `overrides` replace or extend its default
/// parameters.
///
/// The u-diffusion of the single-component models is read from parameter
/// `D`.
pub fn builtin_model(name: &str, overrides: &BTreeMap<String, f64>) -> Result<ModelSpec, ModelError> {
    match name {
        "linear-growth" => {
            let params = merged(&[], overrides);
            ModelSpec::parse(
                &[0.0],
                &["0"],
                "(sqrt(2)*cos(pi*x) + 2*cos(pi*x)^2)*v",
                &["0"],
                "sqrt(2)*cos(pi*x)",
                params,
            )
        }
        "predator-prey" => {
            let params = merged(
                &[
                    ("a", 1.0),
                    ("b", 1.0),
                    ("c", 1.0),
                    ("d", 1.0),
                    ("p", 1.0),
                    ("D", 0.0),
                    ("u0_mean", 0.3),
                    ("u0_amp", 0.2),
                    ("v0_mean", 0.5),
                    ("v0_amp", 0.2),
                ],
                overrides,
            );
            let diffusion = params["D"];
            ModelSpec::parse(
                &[diffusion],
                &["-p*u1 + b*v"],
                "(d - a*u1 - c*v)*v",
                &["u0_mean + u0_amp*sqrt(2)*cos(2*pi*x)"],
                "v0_mean + v0_amp*sqrt(2)*cos(pi*x)",
                params,
            )
        }
        "decoupled-heat" => {
            let params = merged(&[("D", 1.0)], overrides);
            let diffusion = params["D"];
            ModelSpec::parse(
                &[diffusion],
                &["0"],
                "0",
                &["sqrt(2)*cos(pi*x)"],
                "1 + 0.5*sqrt(2)*cos(pi*x)",
                params,
            )
        }
        other => Err(ModelError::UnknownBuiltin(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::SpectralGrid;
    use crate::model::CompiledModel;

    #[test]
    fn every_listed_model_builds() {
        for (name, _) in BUILTIN_MODELS {
            builtin_model(name, &BTreeMap::new()).unwrap();
        }
        assert!(matches!(
            builtin_model("nope", &BTreeMap::new()),
            Err(ModelError::UnknownBuiltin(_))
        ));
    }

    #[test]
    fn linear_growth_initial_mean_and_coefficient_mean() {
        let grid = SpectralGrid::new(64).unwrap();
        let model = builtin_model("linear-growth", &BTreeMap::new()).unwrap().compile().unwrap();
        let data = model.initial_data(&grid).unwrap();
        let mean_v0 = data.v.iter().sum::<f64>() / 64.0;
        assert!(mean_v0.abs() < 1e-14);
        // <D> = <w1 + w1^2> = 1
        let mut slots = model.slot_buffer();
        let mut f = [0.0];
        let mean_d = grid
            .nodes()
            .iter()
            .map(|&x| {
                CompiledModel::fill_slots(&mut slots, x, 0.0, 1.0, [0.0]);
                model.reaction(&slots, &mut f).unwrap()
            })
            .sum::<f64>()
            / 64.0;
        assert!((mean_d - 1.0).abs() < 1e-13);
    }

    #[test]
    fn predator_prey_steady_state_at_unit_parameters() {
        let model = builtin_model("predator-prey", &BTreeMap::new()).unwrap().compile().unwrap();
        let mut slots = model.slot_buffer();
        let mut f = [0.0];
        CompiledModel::fill_slots(&mut slots, 0.3, 0.0, 0.5, [0.5]);
        let g = model.reaction(&slots, &mut f).unwrap();
        assert_eq!((f[0], g), (0.0, 0.0));
    }
}
