//! Continuum probes: Airy values and a synthesised cubic-phase probe.

use huffman_delta::continuum::{airy_ai, synthesize_probe, verify_delta_correlation, PhaseTerm, ProbeSpec};
use huffman_delta::Result;

fn main() -> Result<()> {
    for x in [-10.0, -2.0, 0.0, 2.0, 10.0] {
        println!("Ai({x:5.1}) = {:.15e}", airy_ai(x));
    }
    let spec = ProbeSpec {
        samples: vec![1024],
        step: vec![0.25],
        terms: vec![PhaseTerm {
            m: 3,
            n: 0,
            coef: 1.0 / 3.0,
        }],
        pedestal: 0.0,
    };
    let probe = synthesize_probe(&spec)?;
    let v = probe.to_f64_vec();
    // Compare near the origin; far samples carry the periodic wrap of the oscillating tail.
    let worst = (512 - 24..=512 + 24)
        .map(|k| (v[k] - airy_ai((k as f64 - 512.0) * 0.25)).abs())
        .fold(0.0f64, f64::max);
    println!("probe vs Ai on [-6, 6]: max difference {worst:.2e}");
    let d = verify_delta_correlation(&probe)?;
    println!(
        "periodic off-peak {:.2e}, aperiodic off-peak {:.3}",
        d.periodic_off_peak, d.aperiodic_off_peak
    );
    println!("pedestal for non-negativity: {:.4}", -probe.min_max().0);

    let astig = ProbeSpec {
        samples: vec![64, 64],
        step: vec![0.5, 0.5],
        terms: vec![
            PhaseTerm { m: 3, n: 0, coef: 0.3 },
            PhaseTerm { m: 0, n: 3, coef: 0.3 },
            PhaseTerm { m: 2, n: 1, coef: 0.1 },
        ],
        pedestal: 0.0,
    };
    let p2 = synthesize_probe(&astig)?;
    println!(
        "2D probe periodic off-peak {:.2e}",
        verify_delta_correlation(&p2)?.periodic_off_peak
    );
    Ok(())
}
