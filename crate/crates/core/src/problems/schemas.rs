//! Design spaces of the engineering problems. No evaluators are attached.

use crate::error::{Error, Result};
use crate::space::{DesignSpace, Variable};

pub fn cantilever() -> DesignSpace {
    DesignSpace::new(vec![
        Variable::continuous("length", 10.0, 20.0),
        Variable::continuous("surface", 1.0, 2.0),
        Variable::categorical_n("shape", 12),
    ])
    .unwrap()
}

/// Batch size is encoded by its exponent (`2^3 ..= 2^8`).
pub fn neural_network() -> DesignSpace {
    DesignSpace::new(vec![
        Variable::continuous("learning_rate", 1e-5, 1e-2),
        Variable::integer("batch_size_log2", 3, 8),
        Variable::integer("n_layers", 1, 3).meta(),
        Variable::integer("neurons_1", 50, 55).decreed_by(2, &[0, 1, 2]),
        Variable::integer("neurons_2", 50, 55).decreed_by(2, &[1, 2]),
        Variable::integer("neurons_3", 50, 55).decreed_by(2, &[2]),
        Variable::categorical("activation", &["relu", "sigmoid"]),
    ])
    .unwrap()
}

/// Cruise altitude is encoded by its index in `{30k, 32k, 34k, 36k}` ft.
pub fn ceras() -> DesignSpace {
    DesignSpace::new(vec![
        Variable::continuous("x_mac", 16.0, 18.0),
        Variable::continuous("wing_aspect_ratio", 5.0, 11.0),
        Variable::continuous("vt_aspect_ratio", 1.5, 6.0),
        Variable::continuous("ht_aspect_ratio", 1.5, 6.0),
        Variable::continuous("wing_taper_ratio", 0.0, 1.0),
        Variable::continuous("wing_sweep", 20.0, 30.0),
        Variable::integer("cruise_altitude", 0, 3),
        Variable::integer("n_engines", 2, 4),
        Variable::categorical("tail_geometry", &["t_tail", "no_t_tail"]),
        Variable::categorical("engine_position", &["front", "rear"]),
    ])
    .unwrap()
}

pub fn ceras_mo() -> DesignSpace {
    DesignSpace::new(vec![
        Variable::continuous("x_mac", 16.0, 18.0),
        Variable::continuous("wing_aspect_ratio", 5.0, 11.0),
        Variable::continuous("ht_aspect_ratio", 1.5, 6.0),
        Variable::continuous("wing_taper_ratio", 0.0, 1.0),
        Variable::continuous("wing_sweep", 20.0, 30.0),
    ])
    .unwrap()
}

pub fn dragon() -> DesignSpace {
    DesignSpace::new(vec![
        Variable::continuous("fan_pressure_ratio", 1.05, 1.3),
        Variable::continuous("wing_aspect_ratio", 8.0, 12.0),
        Variable::continuous("wing_sweep", 15.0, 40.0),
        Variable::continuous("wing_taper_ratio", 0.2, 0.5),
        Variable::continuous("ht_aspect_ratio", 3.0, 6.0),
        Variable::continuous("ht_sweep", 20.0, 40.0),
        Variable::continuous("ht_taper_ratio", 0.3, 0.5),
        Variable::continuous("tofl_sizing", 1800.0, 2500.0),
        Variable::continuous("toc_vertical_speed", 300.0, 800.0),
        Variable::continuous("climb_slope", 0.075, 0.15),
        Variable::categorical_n("architecture", 17),
        Variable::categorical_n("turboshaft_layout", 2),
    ])
    .unwrap()
}

pub fn airframe() -> DesignSpace {
    DesignSpace::new(vec![
        Variable::continuous("bypass_ratio", 9.0, 15.0),
        Variable::continuous("engine_x", -0.98, -0.80),
        Variable::continuous("engine_z", -0.39, -0.21),
        Variable::categorical("obs_architecture", &["conv", "mea1", "mea2", "aea"]),
    ])
    .unwrap()
}

const SHARING: [&str; 2] = ["yes", "no"];

/// Wing 1 is always active; wing 2 is active when wings 1&2 are not shared
/// and wing 3 when wings 2&3 are not shared.
pub fn family() -> DesignSpace {
    let commonality = [
        "engine_12", "engine_23", "wing_12", "wing_23", "gear_12", "gear_23", "obs_12", "obs_23", "empennage_13", "empennage_32",
    ];
    let first_cat = 9;
    let wing_parent = [None, Some(first_cat + 2), Some(first_cat + 3)];
    let mut vars = Vec::new();
    for (w, parent) in wing_parent.iter().enumerate() {
        for (name, lo, hi) in [("sweep", 30.0, 42.0), ("rear_spar", 0.72, 0.82), ("thickness", 0.06, 0.11)] {
            let v = Variable::continuous(&format!("{name}_{}", w + 1), lo, hi);
            vars.push(match parent {
                Some(p) => v.decreed_by(*p, &[1]),
                None => v,
            });
        }
    }
    for (i, c) in commonality.iter().enumerate() {
        let v = Variable::categorical(&format!("share_{c}"), &SHARING);
        vars.push(if wing_parent.contains(&Some(first_cat + i)) { v.meta() } else { v });
    }
    DesignSpace::new(vars).unwrap()
}

pub fn production() -> DesignSpace {
    let parts = [
        ("skin", 21),
        ("spar", 21),
        ("stringer", 21),
        ("rib", 21),
        ("assembly", 6),
        ("material", 5),
        ("process", 4),
        ("transport", 5),
    ];
    DesignSpace::new(parts.iter().map(|(n, l)| Variable::categorical_n(n, *l)).collect()).unwrap()
}

/// Names accepted by [`schema`].
pub fn names() -> Vec<&'static str> {
    vec!["cantilever", "neural_network", "ceras", "ceras_mo", "dragon", "airframe", "family", "production"]
}

pub fn schema(name: &str) -> Result<DesignSpace> {
    Ok(match name {
        "cantilever" => cantilever(),
        "neural_network" => neural_network(),
        "ceras" => ceras(),
        "ceras_mo" => ceras_mo(),
        "dragon" => dragon(),
        "airframe" => airframe(),
        "family" => family(),
        "production" => production(),
        _ => return Err(Error::Config(format!("unknown schema `{name}`"))),
    })
}
