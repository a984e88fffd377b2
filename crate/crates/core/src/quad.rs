//! Composite Gauss-Legendre quadrature.

const NODES: [f64; 4] =
    [0.183_434_642_495_649_8, 0.525_532_409_916_329, 0.796_666_477_413_626_7, 0.960_289_856_497_536_3];
const WEIGHTS: [f64; 4] =
    [0.362_683_783_378_362, 0.313_706_645_877_887_3, 0.222_381_034_453_374_5, 0.101_228_536_290_376_3];

/// Eight-point Gauss-Legendre rule on a single panel.
pub(crate) fn gauss8<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = 0.0;
    for (x, w) in NODES.iter().zip(WEIGHTS.iter()) {
        acc += w * (f(mid - half * x) + f(mid + half * x));
    }
    acc * half
}

/// Composite rule with panels no longer than `max_panel`.
pub(crate) fn composite<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, max_panel: f64) -> f64 {
    if b <= a {
        return if b < a { -composite(f, b, a, max_panel) } else { 0.0 };
    }
    let panels = ((b - a) / max_panel).ceil().max(1.0) as usize;
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let lo = a + i as f64 * h;
            let hi = if i + 1 == panels { b } else { lo + h };
            gauss8(f, lo, hi)
        })
        .sum()
}

/// Composite rule that also splits at the given (sorted) discontinuities.
pub(crate) fn composite_split<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    max_panel: f64,
    breaks: &[f64],
) -> f64 {
    let start = breaks.partition_point(|&x| x <= a);
    let mut lo = a;
    let mut acc = 0.0;
    for &br in &breaks[start..] {
        if br >= b {
            break;
        }
        acc += composite(f, lo, br, max_panel);
        lo = br;
    }
    acc + composite(f, lo, b, max_panel)
}
