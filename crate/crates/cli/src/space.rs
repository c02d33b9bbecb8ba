//! Parser for design-space literals.
//!
//! Grammar: semicolon-separated clauses, e.g.
//! `float:m1-16,e1-8;fixed:i1-16:2,f1-16:2;bias=15`. Each field is
//! `<tag><lo>[-<hi>][:<step>]`; a bare value means a single point. The
//! literal `default` selects the documented default space.

use anyhow::{anyhow, bail, Context, Result};
use precis_core::search::{DesignSpaceConfig, FixedSpace, FloatSpace, RangeSpec};

pub fn parse_space(literal: &str) -> Result<DesignSpaceConfig> {
    if literal == "default" {
        return Ok(DesignSpaceConfig::default());
    }
    let mut cfg = DesignSpaceConfig {
        float: None,
        fixed: None,
        bias_override: None,
    };
    for clause in literal.split(';') {
        if let Some(body) = clause.strip_prefix("float:") {
            let (m, e) = two_fields(body, 'm', 'e')
                .with_context(|| format!("in float clause {clause:?}"))?;
            cfg.float = Some(FloatSpace {
                mantissa: m,
                exponent: e,
            });
        } else if let Some(body) = clause.strip_prefix("fixed:") {
            let (i, f) = two_fields(body, 'i', 'f')
                .with_context(|| format!("in fixed clause {clause:?}"))?;
            cfg.fixed = Some(FixedSpace {
                integer: i,
                fraction: f,
            });
        } else if let Some(body) = clause.strip_prefix("bias=") {
            cfg.bias_override = Some(body.parse().with_context(|| format!("bias {body:?}"))?);
        } else {
            bail!("unknown space clause {clause:?}; expected float:, fixed:, or bias=");
        }
    }
    if cfg.float.is_none() && cfg.fixed.is_none() {
        bail!("space literal {literal:?} selects no formats");
    }
    Ok(cfg)
}

fn two_fields(body: &str, first: char, second: char) -> Result<(RangeSpec, RangeSpec)> {
    let (a, b) = body
        .split_once(',')
        .ok_or_else(|| anyhow!("expected two comma-separated fields in {body:?}"))?;
    Ok((range_field(a.trim(), first)?, range_field(b.trim(), second)?))
}

fn range_field(field: &str, tag: char) -> Result<RangeSpec> {
    let body = field
        .strip_prefix(tag)
        .ok_or_else(|| anyhow!("field {field:?} must start with {tag:?}"))?;
    let (range, step) = match body.split_once(':') {
        Some((range, step)) => (range, step.parse().context("step")?),
        None => (body, 1),
    };
    if step == 0 {
        bail!("step must be positive in {field:?}");
    }
    let (lo, hi) = match range.split_once('-') {
        Some((lo, hi)) => (lo.parse().context("lower bound")?, hi.parse().context("upper bound")?),
        None => {
            let v = range.parse().context("value")?;
            (v, v)
        }
    };
    if lo > hi {
        bail!("empty range in {field:?}");
    }
    Ok(RangeSpec::new(lo, hi, step))
}

#[cfg(test)]
mod tests {
    use super::*;
    use precis_core::search::enumerate_design_space;

    #[test]
    fn default_space_has_192_formats() {
        let cfg = parse_space("default").unwrap();
        assert_eq!(enumerate_design_space(&cfg).unwrap().len(), 192);
    }

    #[test]
    fn float_only_toy_space() {
        let cfg = parse_space("float:m1-2,e1-2").unwrap();
        let space = enumerate_design_space(&cfg).unwrap();
        assert_eq!(space.len(), 4);
        assert_eq!(space[0].to_string(), "float:m1e1");
    }

    #[test]
    fn fixed_singleton_and_steps() {
        let cfg = parse_space("fixed:i8,f8").unwrap();
        let space = enumerate_design_space(&cfg).unwrap();
        assert_eq!(space.len(), 1);
        assert_eq!(space[0].to_string(), "fixed:i8f8");

        let cfg = parse_space("fixed:i1-5:2,f1-3:2").unwrap();
        assert_eq!(enumerate_design_space(&cfg).unwrap().len(), 6);
    }

    #[test]
    fn bias_override_applies() {
        let cfg = parse_space("float:m2-2,e4;bias=3").unwrap();
        let space = enumerate_design_space(&cfg).unwrap();
        assert_eq!(space[0].to_string(), "float:m2e4b3");
    }

    #[test]
    fn rejects_malformed_literals() {
        for bad in ["", "float:m1-2", "float:e1,m1", "posit:n8,e2", "fixed:i1-2:0,f1", "float:m5-2,e1"] {
            assert!(parse_space(bad).is_err(), "{bad:?}");
        }
    }
}
