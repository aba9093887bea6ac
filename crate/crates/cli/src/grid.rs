use anyhow::{bail, Context, Result};

/// Parses `a,b,c` or an inclusive range `start:stop:step`.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    if text.contains(':') {
        let parts: Vec<f64> = text
            .split(':')
            .map(|p| p.trim().parse::<f64>().with_context(|| format!("bad number {p:?} in grid {text:?}")))
            .collect::<Result<_>>()?;
        let [start, stop, step] = parts[..] else {
            bail!("range grid must be start:stop:step, got {text:?}");
        };
        if !(step > 0.0) || stop < start {
            bail!("range grid needs step > 0 and stop >= start, got {text:?}");
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        return Ok((0..count).map(|k| start + step * k as f64).collect());
    }
    let values: Vec<f64> = text
        .split(',')
        .map(|p| p.trim().parse::<f64>().with_context(|| format!("bad number {p:?} in grid {text:?}")))
        .collect::<Result<_>>()?;
    if values.iter().any(|v| !v.is_finite()) {
        bail!("grid values must be finite, got {text:?}");
    }
    Ok(values)
}

pub fn parse_modes(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|p| p.trim().parse::<usize>().with_context(|| format!("bad mode count {p:?}")))
        .collect()
}
