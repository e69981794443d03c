// Scans candidate initial conditions for frozen test fixtures.
use henon_core::indicators::*;
use henon_core::map::*;
use henon_core::stats::linear_fit;
use henon_core::testkit::modulation_factor_oracle;
use nalgebra::Vector4;
use std::f64::consts::TAU;

fn main() {
    // Frozen value for the modulated-frequency oracle example.
    let params = MapParams {
        omega_x0: 0.28 * TAU,
        omega_y0: 0.31 * TAU,
        mu: 0.5,
        modulation: Modulation::ripple(32.0),
        r_c: 100.0,
    };
    let harmonics: Vec<(f64, f64)> = params
        .modulation
        .harmonics
        .iter()
        .map(|h| (h.amplitude, h.frequency))
        .collect();
    let oracle = modulation_factor_oracle(32.0, &harmonics, 1000);
    let (wx, wy) = modulated_frequencies(&params, 1000);
    println!("factor oracle at n=1000: {:.17e}", oracle);
    println!("omega_x(1000) = {:.17e}  (oracle {:.17e})", wx, params.omega_x0 * oracle);
    println!("omega_y(1000) = {:.17e}", wy);

    // Candidate orbits: scan the diagonal for survival + regular/chaotic split.
    let ladder: Vec<u64> = (0..=20).map(|i| (100.0 * 10f64.powf(i as f64 * 0.15)) as u64).collect();
    println!("\nscan x=y diag, px=py=0, eps=32 mu=0.5 (n_max 2e5):");
    for i in 0..30 {
        let a = 0.02 + 0.02 * i as f64;
        let s = State::new(a, 0.0, a, 0.0);
        let out = track_orbit(s, &params, 200_000, &ladder, true);
        if !out.survived {
            println!("  a={a:.3}: LOST at {}", out.n_stab.unwrap());
            continue;
        }
        // log-log slope of I1 over the ladder + GALI at end
        let xs: Vec<f64> = out.tangents.iter().map(|(n, _)| (*n as f64).log10()).collect();
        let ys: Vec<f64> = out.tangents.iter().map(|(_, l)| covariance_invariants(l).i(1).log10()).collect();
        let (_, slope) = linear_fit(&xs, &ys);
        let g = gali4(&out.tangents.last().unwrap().1);
        let le = lyapunov_error(&out.tangents.last().unwrap().1);
        println!("  a={a:.3}: I1 slope={slope:.2} gali4(2e5)={g:.3e} le={le:.3e}");
    }
    // Small-amplitude regular orbit (eps=0, mu=0) for the asymptotic-law suite.
    let plain = MapParams {
        omega_x0: 0.28 * TAU,
        omega_y0: 0.31 * TAU,
        mu: 0.0,
        modulation: Modulation::none(),
        r_c: 100.0,
    };
    let lad: Vec<u64> = (3..=10).map(|i| 10u64.pow(i as u32 / 2) * if i % 2 == 0 { 1 } else { 3 }).collect();
    let mut lad = lad; lad.sort(); lad.dedup();
    let s = State::new(0.05 / 2f64.sqrt(), 0.0, 0.05 / 2f64.sqrt(), 0.0);
    println!("\nsmall-amplitude orbit ||s||=0.05 (eps=0, mu=0), ladder {:?}", lad);
    let out = track_orbit(s, &plain, 100_000, &lad, true);
    for (n, l) in &out.tangents {
        let inv = covariance_invariants(l);
        println!("  n={n}: I1={:.4e} gali4={:.4e} fli={:.4}", inv.i(1), gali4(l), fli(l, &Vector4::new(1.0,0.0,0.0,0.0)));
    }
    let xs: Vec<f64> = out.tangents.iter().filter(|(n,_)| *n >= 1000).map(|(n, _)| (*n as f64).log10()).collect();
    let ys: Vec<f64> = out.tangents.iter().filter(|(n,_)| *n >= 1000).map(|(_, l)| covariance_invariants(l).i(1).log10()).collect();
    let (_, slope) = linear_fit(&xs, &ys);
    println!("  I1 slope over [1e3,1e5]: {slope:.3}");
}
