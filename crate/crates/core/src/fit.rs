use crate::error::{Error, Result};

/// Ordinary least-squares slope of `ys` against `xs`.
pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidParameter(
            "slope fit needs at least two paired samples".into(),
        ));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (sxy, sxx) = xs.iter().zip(ys).fold((0.0, 0.0), |(sxy, sxx), (&x, &y)| {
        (sxy + (x - mx) * (y - my), sxx + (x - mx) * (x - mx))
    });
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("all abscissae coincide".into()));
    }
    Ok(sxy / sxx)
}

/// Convergence order: slope of `ln(error)` against `ln(dt)`.
pub fn fit_order(rows: &[(f64, f64)]) -> Result<f64> {
    if rows.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "order fit needs >= 3 rows, got {}",
            rows.len()
        )));
    }
    if let Some(&(dt, err)) = rows.iter().find(|(dt, err)| !(*err > 0.0 && *dt > 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "degenerate row dt={dt} error={err}; errors must be positive"
        )));
    }
    let xs: Vec<f64> = rows.iter().map(|(dt, _)| dt.ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|(_, e)| e.ln()).collect();
    least_squares_slope(&xs, &ys)
}
