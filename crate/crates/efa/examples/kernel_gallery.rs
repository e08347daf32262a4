//! Averaging kernels: moment tables and the oscillation-averaging rate.
//!
//! A kernel with smoothness order q kills a pure eps-oscillation at rate
//! (eps/scale)^(q+2); the table at the end measures that slope.
//!
//! ```text
//! cargo run --release --example kernel_gallery
//! ```

use efa::harness::fit_loglog_slope;
use efa::kernel::{weighted_average, Kernel};
use std::f64::consts::PI;

fn main() -> efa::Result<()> {
    println!("== kernels K(t) = P(t^2) (1 - t^2)^(q+1), support [-1, 1] ==");
    for (p, q) in [(1u32, 0u32), (3, 1), (3, 3), (3, 5), (5, 5), (5, 7)] {
        let k = Kernel::build(p, q)?;
        print!("(p={p}, q={q}): K(0) = {:8.4}, moments ", k.eval(0.0));
        for r in 0..=p.min(6) {
            print!("m{r} = {:+.1e}  ", k.moment(r));
        }
        println!();
    }

    println!("\n== averaging rate: worst-phase error of sin(2 pi x / eps) ==");
    let scale = 0.05;
    let n = (1 << 15) + 1;
    let step = 2.0 * scale / (n - 1) as f64;
    let ratios = [0.2, 0.14, 0.1, 0.07, 0.05, 0.035, 0.02];
    let phases = [0.0, 0.4 * PI, 0.8 * PI, 1.2 * PI, 1.6 * PI];
    println!("eps/scale:   {}", ratios.map(|r| format!("{r:>9}")).join(" "));
    for (p, q) in [(7u32, 1u32), (7, 3), (7, 5)] {
        let kernel = Kernel::build(p, q)?;
        let mut pts = Vec::new();
        let mut row = String::new();
        for r in ratios {
            let eps = r * scale;
            let mut worst = 0.0f64;
            for ph in phases {
                let vals: Vec<f64> = (0..n)
                    .map(|i| {
                        let x = -scale + i as f64 * step;
                        (2.0 * PI * x / eps + ph).sin()
                    })
                    .collect();
                let v = weighted_average(&kernel, scale, 0.0, -scale, step, &vals)?;
                worst = worst.max(v.abs());
            }
            row.push_str(&format!(" {worst:9.2e}"));
            pts.push((eps, worst));
        }
        let slope = fit_loglog_slope(&pts)?;
        println!("(p={p}, q={q}):{row}   slope {slope:+.2} (theory {})", q + 2);
    }
    Ok(())
}
