//! Shared scenario builders for the benchmark targets, kept small enough
//! that a full `cargo bench` run finishes in minutes on one core.

use nfcomb_core::{
    CombSource, EngineConfig, IsotopeParams, LossModel, Protocol, Scenario, ScenarioSpec,
    SweepPlan,
};

pub fn reference_spec() -> ScenarioSpec {
    ScenarioSpec {
        comb: CombSource::Isotope { name: "181Ta".into() },
        protocol: Protocol::PredeterminedZnfc,
        loss: LossModel::Realistic,
        xi: 15.216,
        t0: 11.498628597397508,
        linewidth_factor: 1.0,
        photoelectric_per_xi: None,
        switch_fraction: 0.5,
        switch_ramp: 0.0,
        input_duration_factor: 1.0,
        input_fwhm_us: Some(1.41),
        switch_time_us: None,
        steps_per_beat: 64,
        slices: None,
        grid: None,
    }
}

pub fn on_demand_spec() -> ScenarioSpec {
    ScenarioSpec { protocol: Protocol::OndemandZnfc, ..reference_spec() }
}

pub fn reference_scenario() -> Scenario {
    nfcomb_core::build_scenario(&reference_spec(), table()).expect("reference spec builds")
}

pub fn table() -> &'static [IsotopeParams] {
    nfcomb_core::builtin_isotopes()
}

pub fn engine_config() -> EngineConfig {
    EngineConfig::default()
}

/// 3 × 3 realistic grid around the efficiency optimum — one inner sweep loop
/// without drowning the benchmark in repeats.
pub fn small_sweep_plan() -> SweepPlan {
    SweepPlan {
        comb: CombSource::Isotope { name: "181Ta".into() },
        protocol: Protocol::PredeterminedZnfc,
        loss: LossModel::Realistic,
        xi_values: vec![12.0, 15.0, 18.0],
        t0_values: vec![10.0, 11.5, 13.0],
        linewidth_factor: 1.0,
        photoelectric_per_xi: None,
        switch_fraction: 0.5,
        switch_ramp: 0.0,
        input_duration_factor: 1.0,
        steps_per_beat: 64,
        slices: None,
        threads: Some(1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builders_produce_runnable_scenarios() {
        let sc = reference_scenario();
        assert_eq!(sc.comb.tooth_count(), 8);
        let sim = nfcomb_core::simulate(&sc.input, &sc.stack).unwrap();
        assert_eq!(sim.output.samples.len(), sc.input.samples.len());
        assert!(nfcomb_core::build_scenario(&on_demand_spec(), table())
            .unwrap()
            .switch
            .is_some());
    }
}
