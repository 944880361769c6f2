//! Shape mini-language for flags.
//!
//! `ball:cx,cy,r`, `halfspace:nx,ny,c` (the set `x . n < c`),
//! `interval:a,b;c,d`, `koch:k,side`, `polygon:x1,y1;x2,y2;...`, or a path
//! to a JSON file holding a planar set (grid, analytic shape or snowflake).

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use nlperim::geometry::{koch_snowflake, make_interval_set, AnalyticShape, PlanarSet, Vec2};
use nlperim::kernel::Region;

/// A parsed set and the bytes of the file it came from, if any.
pub struct Parsed {
    pub region: Region,
    pub file: Option<Vec<u8>>,
}

fn numbers(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .with_context(|| format!("not a number: {t:?}"))
        })
        .collect()
}

fn pairs(s: &str) -> Result<Vec<(f64, f64)>> {
    s.split(';')
        .map(|p| match numbers(p)?.as_slice() {
            [a, b] => Ok((*a, *b)),
            _ => Err(anyhow!("expected a pair in {p:?}")),
        })
        .collect()
}

pub fn parse(spec: &str) -> Result<Parsed> {
    let Some((kind, body)) = spec.split_once(':') else {
        if spec.ends_with(".json") {
            let bytes =
                std::fs::read(Path::new(spec)).with_context(|| format!("reading {spec}"))?;
            let set: PlanarSet =
                serde_json::from_slice(&bytes).with_context(|| format!("parsing {spec}"))?;
            return Ok(Parsed {
                region: Region::Plane(set),
                file: Some(bytes),
            });
        }
        bail!("unrecognized set {spec:?}; expected kind:params or a .json file");
    };
    let plane = |s: AnalyticShape| Region::Plane(PlanarSet::Shape(s));
    let region = match kind {
        "ball" => match numbers(body)?.as_slice() {
            [x, y, r] => plane(AnalyticShape::ball(Vec2::new(*x, *y), *r)?),
            _ => bail!("ball needs cx,cy,r"),
        },
        "halfspace" => match numbers(body)?.as_slice() {
            [nx, ny, c] => plane(AnalyticShape::half_space(Vec2::new(*nx, *ny), *c)?),
            _ => bail!("halfspace needs nx,ny,c"),
        },
        "interval" => Region::Line(make_interval_set(&pairs(body)?)?),
        "polygon" => plane(AnalyticShape::polygon(
            pairs(body)?
                .into_iter()
                .map(|(x, y)| Vec2::new(x, y))
                .collect(),
        )?),
        "koch" => {
            let parts: Vec<&str> = body.split(',').collect();
            let [k, side] = parts.as_slice() else {
                bail!("koch needs k,side")
            };
            let k: usize = k.trim().parse().context("koch generation")?;
            let side: f64 = side.trim().parse().context("koch side")?;
            if !(side > 0.0) || k > 9 {
                bail!("koch needs side > 0 and generation at most 9");
            }
            Region::Plane(PlanarSet::Koch(koch_snowflake(k, side)))
        }
        _ => bail!("unknown set kind {kind:?}"),
    };
    Ok(Parsed { region, file: None })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kinds() {
        assert!(matches!(
            parse("interval:0,1;2,3").unwrap().region,
            Region::Line(_)
        ));
        assert!(matches!(
            parse("ball:0,0,1").unwrap().region,
            Region::Plane(PlanarSet::Shape(AnalyticShape::Ball { .. }))
        ));
        assert!(matches!(
            parse("koch:2,1").unwrap().region,
            Region::Plane(PlanarSet::Koch(_))
        ));
        assert!(parse("ball:0,0").is_err());
        assert!(parse("blob:1").is_err());
    }
}
