//! One PASS/FAIL line per acceptance criterion, an independent oracle for
//! the fundamental-stratum grid, and a re-run at 48 digits that must
//! reproduce every verdict.
//!
//! `cargo test --test acceptance -- 5 6` runs a subset.

use std::process::ExitCode;

use semistrata::arith::{fmat, Field};
use semistrata::lattices::LatticeSeq;
use semistrata::selftest::{criterion, Outcome, Profile, CRITERIA, DEFAULT_PRECISION, STABILITY_PRECISION};
use semistrata::strata::{is_fundamental, Stratum};

/// Newton polygon of the characteristic polynomial: the stratum is
/// non-fundamental iff e·v(c_k) > −k·q for every k ≥ 1.
fn newton_fundamental(s: &Stratum) -> bool {
    let n = s.dim();
    let cp = s.beta.charpoly();
    let e = s.period();
    (1..=n).any(|k| match cp.coeff(n - k).valuation() {
        None => false,
        Some(v) => e * v <= -(k as i64) * s.q,
    })
}

/// Re-derives criterion 6's grid verdicts without the residual machinery.
fn newton_oracle(prec: u32, height: i64) -> (bool, String) {
    let f = Field::qp(3, prec).unwrap();
    let lats = [
        LatticeSeq::standard(&f, vec![0], 1).unwrap(),
        LatticeSeq::standard(&f, vec![0, 0], 1).unwrap(),
        LatticeSeq::standard(&f, vec![0, 1], 2).unwrap(),
    ];
    let vals: Vec<i64> = (-height..=height).collect();
    let (mut checked, mut bad) = (0usize, 0usize);
    for lat in &lats {
        let n = lat.dim();
        for k in 1..=2 {
            for code in 0..vals.len().pow((n * n) as u32) {
                let mut c = code;
                let mut m = fmat::zeros(&f, n, n);
                for i in 0..n * n {
                    m.set(i / n, i % n, f.int(vals[c % vals.len()]));
                    c /= vals.len();
                }
                let b = m.scale(&f.pi_pow(-k));
                let q = match lat.nu(&b) {
                    Some(v) if (1..=2).contains(&-v) => -v,
                    _ => continue,
                };
                let s = Stratum::new(lat.clone(), q, q - 1, b, None).unwrap();
                checked += 1;
                if is_fundamental(&s).unwrap() != newton_fundamental(&s) {
                    bad += 1;
                }
            }
        }
    }
    (bad == 0 && checked > 0, format!("{checked} strata (height <= {height}), {bad} disagreements"))
}

fn main() -> ExitCode {
    let only: Vec<u8> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let ids: Vec<u8> = if only.is_empty() { CRITERIA.to_vec() } else { only };
    let mut all = true;

    let first: Vec<Outcome> = ids
        .iter()
        .map(|&k| {
            let o = criterion(k, Profile::Full, DEFAULT_PRECISION);
            println!("{}", o.line());
            all &= o.pass;
            o
        })
        .collect();

    if ids.contains(&6) {
        let (ok, msg) = newton_oracle(DEFAULT_PRECISION, 6);
        println!("{} criterion 6 oracle (Newton polygon): {msg}", if ok { "PASS" } else { "FAIL" });
        all &= ok;
    }

    let mut diffs = vec![];
    for o in &first {
        let again = criterion(o.id, Profile::Full, STABILITY_PRECISION);
        if again.ok != o.ok || again.verdicts != o.verdicts {
            let at = o.verdicts.iter().zip(&again.verdicts).position(|(a, b)| a != b);
            diffs.push(format!("criterion {} ({} -> {}, first differing verdict {:?})", o.id, o.ok, again.ok, at));
        }
        if !again.ok {
            diffs.push(format!("criterion {} at {STABILITY_PRECISION} digits: {}", o.id, again.detail));
        }
    }
    let stable = diffs.is_empty();
    println!(
        "{} stability at {STABILITY_PRECISION} digits: {}",
        if stable { "PASS" } else { "FAIL" },
        if stable { format!("verdicts identical to {DEFAULT_PRECISION} digits") } else { diffs.join("; ") }
    );
    all &= stable;
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
