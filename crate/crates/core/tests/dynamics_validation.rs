use std::f64::consts::PI;

use crw_qed::dynamics::{wavepacket_scatter_with, Loss, WavepacketOptions};
use crw_qed::model::discretize_flat_bath;
use crw_qed::{DissipationRates, SystemParams};

/// A packet scattered with explicit flat baths on every resonator and the
/// atom loses the same probability as under the effective lossy chain with
/// `gamma = pi Lambda`. The bath is wide enough that its finite-bandwidth
/// correction to the pole is negligible over the run.
#[test]
fn effective_model_matches_explicit_baths() {
    let gamma = 0.1;
    let p = SystemParams::new(5.0, 1.0, 5.0, 0.8, 261).unwrap();
    let d = DissipationRates::new(gamma, gamma).unwrap();
    let bath = discretize_flat_bath(gamma / PI, 5.0, 64.0, 768).unwrap();
    let loss = Loss::Baths {
        resonator: bath.clone(),
        atom: bath,
    };
    let opts = WavepacketOptions {
        margin: 10,
        ..WavepacketOptions::default()
    };
    let k0 = PI / 2.0;
    let eff = wavepacket_scatter_with(&p, &Loss::Effective(d), k0, 10.0, &opts).unwrap();
    let full = wavepacket_scatter_with(&p, &loss, k0, 10.0, &opts).unwrap();
    for (name, a, b) in [
        ("transmittance", eff.transmittance, full.transmittance),
        ("reflectance", eff.reflectance, full.reflectance),
    ] {
        let rel = (a - b).abs() / a;
        assert!(rel < 0.03, "{name}: effective {a} vs baths {b} ({:.2}%)", 100.0 * rel);
    }
    assert!(full.absorbed > 0.5);
}
