// Sweep diagnostics on a sample set read from stdin (one value per line).
use henon_core::classify::*;
use std::io::Read;

fn main() {
    let mut text = String::new();
    std::io::Read::read_to_string(&mut std::io::stdin(), &mut text).unwrap();
    let samples: Vec<f64> = text.split_whitespace().map(|t| t.parse().unwrap()).collect();
    eprintln!("N = {}", samples.len());
    let h0 = silverman_bandwidth(&samples).unwrap();
    eprintln!("h0 = {h0}");
    let mut sorted = samples.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let lo = henon_core::stats::quantile_sorted(&sorted, 0.002);
    let hi = henon_core::stats::quantile_sorted(&sorted, 0.998);
    eprintln!("span [{lo}, {hi}] step {}", (hi - lo + 6.0 * h0) / 1023.0);
    let grid = UniformGrid::spanning(lo - 3.0 * h0, hi + 3.0 * h0, 1024);
    let mut prev = f64::INFINITY;
    for step in 0..32 {
        let h = (4.0 * h0 * 2.0f64.powf(-(step as f64) / 4.0)).max(grid.step);
        if h >= prev { break; }
        prev = h;
        let d = kde_density_uniform(&samples, h, &grid);
        let max = d.iter().cloned().fold(0.0f64, f64::max);
        let raw = debug_raw_peaks(&d);
        let noise = (max * 0.28209479177387814 / (samples.len() as f64 * h)).sqrt();
        let floor = 4.0 * noise;
        let sig: Vec<String> = raw.iter()
            .map(|&p| {
                let pr = debug_prominence(&d, p);
                format!("{:.2}@{:.2}{}", pr / max, grid.point(p), if pr >= floor { "*" } else { "" })
            })
            .collect();
        println!("step {step:2} h={h:.4} floor_rel={:.3} peaks[prom@loc, *=significant]: {}", floor / max, sig.join(" "));
    }
    let r = mode_tree_threshold(&samples, ModeTarget::Two).unwrap();
    println!("result: success={} threshold={:?}", r.success, r.threshold);
}
