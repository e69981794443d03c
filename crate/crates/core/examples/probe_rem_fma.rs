// REM growth/saturation and FMA values on the frozen fixtures.
use henon_core::freq::fma;
use henon_core::indicators::*;
use henon_core::map::*;
use henon_core::stats::linear_fit;
use std::f64::consts::TAU;

fn main() {
    let params = MapParams {
        omega_x0: 0.28 * TAU,
        omega_y0: 0.31 * TAU,
        mu: 0.5,
        modulation: Modulation::ripple(32.0),
        r_c: 100.0,
    };
    let regular = State::new(0.1, 0.0, 0.1, 0.0);
    let chaotic = State::new(0.2, 0.0, 0.2, 0.0);
    let ns: Vec<u64> = vec![100, 316, 1000, 3162, 10000, 31623, 100000];

    for (name, ic) in [("regular", regular), ("chaotic", chaotic)] {
        println!("== {name} {ic:?}");
        let mut xs = vec![];
        let mut ys = vec![];
        for &n in &ns {
            match rem(&ic, &params, n) {
                Ok(v) => {
                    println!("  REM({n}) = {v:.4e}");
                    if v > 0.0 {
                        xs.push((n as f64).log10());
                        ys.push(v.log10());
                    }
                }
                Err(e) => println!("  REM({n}): {e}"),
            }
        }
        if xs.len() >= 3 {
            let (_, slope) = linear_fit(&xs, &ys);
            println!("  log-log REM slope: {slope:.3}");
        }
        // orbit diameter proxy + FMA at n = 1e5
        let mut s = ic;
        let mut maxnorm = 0.0f64;
        let mut orbit = Vec::with_capacity(100_000);
        for k in 0..100_000u64 {
            orbit.push(s);
            s = forward_step(&s, &params, k).unwrap();
            maxnorm = maxnorm.max(s.norm());
        }
        println!("  max |s| over 1e5: {maxnorm:.3}");
        println!("  FMA(1e5) = {:.4e}", fma(&orbit).unwrap());
        println!("  FMA(1e4) = {:.4e}", fma(&orbit[..10_000]).unwrap());
        println!("  eps^-1 * D = {:.3e}", maxnorm * 2.0 / f64::EPSILON);
    }
}
