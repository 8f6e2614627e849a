//! Least-squares slope of `log y` against `log x`.

/// Slope of the least-squares line through `(ln x_i, ln y_i)`. `None` when
/// fewer than two points are given, the abscissae coincide, or any value is
/// not strictly positive.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return None;
    }
    let n = xs.len() as f64;
    let lx = xs.iter().map(|x| libm::log(*x));
    let ly = ys.iter().map(|y| libm::log(*y));
    let mx = lx.clone().sum::<f64>() / n;
    let my = ly.clone().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in lx.zip(ly) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    if sxx == 0.0 {
        return None;
    }
    Some(sxy / sxx)
}
