//! Built-in oracle suite behind `--selftest`.

use std::f64::consts::PI;

use sectio::bodies::lp_ball;
use sectio::bpgm::{lp_volume_ratio, default_degree, elementary_inequality_residual, kernel, kernel_grid, lp_ball_volume};
use sectio::harmonics::fourier_multiplier;
use sectio::measures::{body_measure, section_measure_direct, section_profile_fourier, Density};
use sectio::GridSpec;

use crate::config::random_directions;

struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn ball_volumes() -> sectio::Result<Check> {
    let leb = Density::lebesgue();
    let mut worst = 0.0f64;
    for (n, p) in [(3, 2.0), (5, 1.0), (4, 4.0)] {
        let grid = GridSpec::orthant(24).build(n)?;
        let v = body_measure(&lp_ball(n, p)?, &leb, &grid)?;
        worst = worst.max((v / lp_ball_volume(n, p) - 1.0).abs());
    }
    Ok(Check {
        name: "lp ball volumes",
        pass: worst <= 1e-6,
        detail: format!("max relative error {worst:.2e}"),
    })
}

fn multipliers() -> sectio::Result<Check> {
    let mut worst = 0.0f64;
    for n in 3..=5 {
        for m in (0..=20).step_by(2) {
            let prod = fourier_multiplier(n, 1.0, m)? * fourier_multiplier(n, (n - 1) as f64, m)?;
            worst = worst.max((prod / (2.0 * PI).powi(n as i32) - 1.0).abs());
        }
    }
    Ok(Check {
        name: "multiplier product (2pi)^n",
        pass: worst <= 1e-12,
        detail: format!("max relative error {worst:.2e}"),
    })
}

fn routes() -> sectio::Result<Check> {
    let n = 4;
    let body = lp_ball(n, 2.0)?;
    let f = Density::gaussian();
    let dirs = random_directions(n, 5, 7);
    let grid = GridSpec::jacobi(16).build(n)?;
    let fourier = section_profile_fourier(&body, &f, &dirs, &grid, 8)?;
    let mut worst = 0.0f64;
    for (d, b) in dirs.iter().zip(&fourier) {
        let a = section_measure_direct(&body, &f, d, GridSpec::jacobi(16))?;
        worst = worst.max((a - b).abs() / a);
    }
    Ok(Check {
        name: "direct vs Fourier sections",
        pass: worst <= 1e-3,
        detail: format!("max relative difference {worst:.2e}"),
    })
}

fn pd_dichotomy() -> sectio::Result<Check> {
    let leb = Density::lebesgue();
    let m = default_degree(5);
    let grid = kernel_grid(5, m)?;
    let b1 = kernel(&lp_ball(5, 1.0)?, &leb, &leb, &grid, m)?;
    let b4 = kernel(&lp_ball(5, 4.0)?, &leb, &leb, &grid, m)?;
    Ok(Check {
        name: "B_1^5 positive definite, B_4^5 not",
        pass: b1.positive_definite() && !b4.positive_definite(),
        detail: format!(
            "min values {:.3e}, {:.3e}",
            b1.transform.min_value, b4.transform.min_value
        ),
    })
}

fn elementary() -> sectio::Result<Check> {
    let r = elementary_inequality_residual(|_| 1.0, |_| 1.0, 1.0, 2.0, 3)?;
    let err = (r.residual - 5.0 / 6.0).abs();
    Ok(Check {
        name: "one-dimensional inequality",
        pass: err <= 1e-12,
        detail: format!("residual {:.9}", r.residual),
    })
}

fn ratio() -> sectio::Result<Check> {
    let r = lp_volume_ratio(5, 1.0);
    Ok(Check {
        name: "volume ratio p=1 n=5",
        pass: (r - 2.5).abs() <= 1e-12,
        detail: format!("ratio {r:.9}"),
    })
}

/// Prints one line per check; returns whether all passed.
pub fn run() -> bool {
    type Case = fn() -> sectio::Result<Check>;
    let cases: [(&str, Case); 6] = [
        ("lp ball volumes", ball_volumes),
        ("multiplier product (2pi)^n", multipliers),
        ("direct vs Fourier sections", routes),
        ("B_1^5 positive definite, B_4^5 not", pd_dichotomy),
        ("one-dimensional inequality", elementary),
        ("volume ratio p=1 n=5", ratio),
    ];
    let mut all = true;
    for (label, case) in cases {
        let check = case().unwrap_or_else(|e| Check {
            name: label,
            pass: false,
            detail: e.to_string(),
        });
        all &= check.pass;
        println!(
            "{:<4} {:<38} {}",
            if check.pass { "PASS" } else { "FAIL" },
            check.name,
            check.detail
        );
    }
    all
}
