//! Composite Simpson rule on uniform panels.

/// Composite Simpson approximation of `∫_a^b f`. `panels` is rounded up to
/// the next even number (and at least 2).
pub fn simpson(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    if a == b {
        return 0.0;
    }
    let n = even_panels(panels);
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + h * i as f64);
    }
    acc * h / 3.0
}

/// Nodes and weights of the composite Simpson rule on `[a, b]`.
pub fn simpson_nodes(a: f64, b: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
    let n = even_panels(panels);
    let h = (b - a) / n as f64;
    let nodes = (0..=n).map(|i| if i == n { b } else { a + h * i as f64 }).collect();
    let weights = (0..=n)
        .map(|i| {
            let w = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w * h / 3.0
        })
        .collect();
    (nodes, weights)
}

pub fn even_panels(panels: usize) -> usize {
    let n = panels.max(2);
    n + n % 2
}
