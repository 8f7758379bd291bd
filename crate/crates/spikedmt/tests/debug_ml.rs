use spikedmt::amp::{run_amp, AmpConfig};
use spikedmt::model::{EstimateSet, ModelParams, PlantedInstance, TensorBackend};
use spikedmt::se::{se_trajectory, SeKind};

#[test]
fn debug_ml_traj() {
    let p = ModelParams::new(0.5, 0.2, [1.5, 0.8, 1.0]).unwrap();
    let inst = PlantedInstance::generate(&p, 500, 13, TensorBackend::Virtual, None).unwrap();
    let q0 = 0.3;
    let init = EstimateSet::informative(&inst.signals, [q0; 4], 33);
    let config = AmpConfig::ml(1.0, 20, 0.0);
    let (_, trace) = run_amp(&inst, init, &config).unwrap();
    let se = se_trajectory(&[q0; 4], SeKind::Ml { rho: 1.0 }, &p, 20);
    for t in 0..21 {
        let e = trace.overlaps[t];
        let s = se[t];
        println!(
            "t={t:2} emp=({:+.4},{:+.4},{:+.4},{:+.4}) se=({:.4},{:.4},{:.4},{:.4})",
            e[0], e[1], e[2], e[3], s[0], s[1], s[2], s[3]
        );
    }
}
