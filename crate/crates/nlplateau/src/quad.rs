//! Gauss-Legendre rules and small composite-quadrature helpers.

use gauss_quad::GaussLegendre;
use std::num::NonZeroUsize;
use std::sync::OnceLock;

/// Largest cached rule.
pub const MAX_POINTS: usize = 64;

static RULES: OnceLock<Vec<Vec<(f64, f64)>>> = OnceLock::new();

fn build() -> Vec<Vec<(f64, f64)>> {
    let mut out = vec![Vec::new()];
    for n in 1..=MAX_POINTS {
        let rule = GaussLegendre::new(NonZeroUsize::new(n).unwrap());
        let mut pairs: Vec<(f64, f64)> = rule.as_node_weight_pairs().to_vec();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        out.push(pairs);
    }
    out
}

/// Nodes and weights of the `n`-point rule on [-1, 1], nodes ascending.
pub fn rule(n: usize) -> &'static [(f64, f64)] {
    assert!((1..=MAX_POINTS).contains(&n), "no cached rule with {n} points");
    &RULES.get_or_init(build)[n]
}

/// `n`-point rule mapped to [a, b].
pub fn mapped(n: usize, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> {
    let c = 0.5 * (a + b);
    let hw = 0.5 * (b - a);
    rule(n).iter().map(move |&(x, w)| (c + hw * x, hw * w))
}

pub fn integrate<F: FnMut(f64) -> f64>(n: usize, a: f64, b: f64, mut f: F) -> f64 {
    mapped(n, a, b).map(|(x, w)| w * f(x)).sum()
}

/// Composite rule over the consecutive intervals of `breaks`.
pub fn composite<F: FnMut(f64) -> f64>(n: usize, breaks: &[f64], mut f: F) -> f64 {
    breaks
        .windows(2)
        .map(|ab| integrate(n, ab[0], ab[1], &mut f))
        .sum()
}

/// Pairwise summation; the result depends only on the order of `xs`.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}
