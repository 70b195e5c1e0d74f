//! The `family:params` mini-language for discounts, rewards and schedules.

use std::fs::File;
use std::path::Path;

use horizonlab::{dyadic_schedule, CustomTable, DiscountFamily, DiscountSpec, Guards, RewardSpec, TailModel};

use crate::CliError;

fn parse_num<T: std::str::FromStr>(what: &str, s: &str) -> Result<T, CliError> {
    s.trim()
        .parse()
        .map_err(|_| CliError::Parse(format!("cannot read {what} from {s:?}")))
}

fn parse_list<T: std::str::FromStr>(what: &str, s: &str) -> Result<Vec<T>, CliError> {
    s.split(',').filter(|x| !x.trim().is_empty()).map(|x| parse_num(what, x)).collect()
}

fn read_file(path: &str) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{path}: {e}")))
}

fn open(path: &str) -> Result<File, CliError> {
    File::open(Path::new(path)).map_err(|e| CliError::Parse(format!("{path}: {e}")))
}

fn split(s: &str) -> (&str, &str) {
    s.split_once(':').unwrap_or((s, ""))
}

fn no_params(name: &str, params: &str) -> Result<(), CliError> {
    if params.is_empty() {
        Ok(())
    } else {
        Err(CliError::Parse(format!("{name} takes no parameters")))
    }
}

/// `family[:params][*scale]` or `@file.json`.
pub fn parse_discount(s: &str) -> Result<DiscountSpec, CliError> {
    let s = s.trim();
    if let Some(path) = s.strip_prefix('@') {
        return Ok(DiscountSpec::from_json(&read_file(path)?)?);
    }
    let (body, scale) = match s.rsplit_once('*') {
        Some((b, c)) => (b, parse_num::<f64>("scale", c)?),
        None => (s, 1.0),
    };
    let family = if let Some(path) = body.strip_prefix("custom:") {
        let (path, tail) = match path.split_once(':') {
            Some((p, t)) => (p, Some(parse_tail(t)?)),
            None => (path, None),
        };
        DiscountFamily::Custom(CustomTable::from_csv(open(path)?, tail)?)
    } else {
        parse_family(body)?
    };
    Ok(DiscountSpec::with_scale(family, scale)?)
}

fn parse_tail(s: &str) -> Result<TailModel, CliError> {
    match s.split_once('=') {
        Some(("geometric", g)) => Ok(TailModel::Geometric { g: parse_num("tail ratio", g)? }),
        Some(("power", e)) => Ok(TailModel::Power { eps: parse_num("tail exponent", e)? }),
        _ => Err(CliError::Parse(format!("tail model {s:?} is not geometric=G or power=EPS"))),
    }
}

fn parse_family(s: &str) -> Result<DiscountFamily, CliError> {
    let (name, params) = split(s);
    Ok(match name {
        "finite" => DiscountFamily::Finite { m: parse_num("horizon", params)? },
        "geometric" => DiscountFamily::Geometric { g: parse_num("ratio", params)? },
        "quadratic" => {
            no_params(name, params)?;
            DiscountFamily::Quadratic
        }
        "power" => DiscountFamily::Power { eps: parse_num("exponent", params)? },
        "harmonic" | "harmonic-like" => {
            no_params(name, params)?;
            DiscountFamily::HarmonicLike
        }
        "step-log" => {
            no_params(name, params)?;
            DiscountFamily::StepLog
        }
        "cosine" | "cosine-modulated" => {
            no_params(name, params)?;
            DiscountFamily::CosineModulated
        }
        "alternating-zero" => DiscountFamily::AlternatingZero {
            inner: Box::new(parse_family(params)?),
        },
        "patched" => DiscountSpec::build_patched(&parse_list::<u64>("threshold", params)?)?.family,
        _ => return Err(CliError::Parse(format!("unknown discount family {name:?}"))),
    })
}

/// `family[:params]` or `@file.json`.
pub fn parse_reward(s: &str) -> Result<RewardSpec, CliError> {
    let s = s.trim();
    if let Some(path) = s.strip_prefix('@') {
        return Ok(RewardSpec::from_json(&read_file(path)?)?);
    }
    let (name, params) = split(s);
    Ok(match name {
        "constant" => RewardSpec::constant(parse_num("reward", params)?)?,
        "alternating" => {
            no_params(name, params)?;
            RewardSpec::alternating()
        }
        "periodic" => RewardSpec::periodic(parse_list("reward", params)?)?,
        "linear-runs" => {
            no_params(name, params)?;
            RewardSpec::LinearRuns
        }
        "exponential-runs" => {
            no_params(name, params)?;
            RewardSpec::ExponentialRuns
        }
        "change-points" => RewardSpec::change_points_list(parse_list("change point", params)?)?,
        "custom" => RewardSpec::custom_from_csv(open(params)?)?,
        _ => return Err(CliError::Parse(format!("unknown reward family {name:?}"))),
    })
}

/// `dyadic:N` or `list:k1,k2,...`.
pub fn parse_schedule(s: &str) -> Result<Vec<u64>, CliError> {
    match split(s.trim()) {
        ("dyadic", n) => {
            let n: u32 = parse_num("exponent", n)?;
            if n > 63 {
                return Err(CliError::Parse(format!("dyadic exponent {n} exceeds 63")));
            }
            Ok(dyadic_schedule(n))
        }
        ("list", l) => parse_list("index", l),
        _ => Err(CliError::Parse(format!("schedule {s:?} is not dyadic:N or list:..."))),
    }
}

/// `HORIZONLAB_GUARD`: one integer for every limit, or
/// `max_terms=..,max_horizon=..,search_bound=..`.
pub fn guards_from_env() -> Result<Guards, CliError> {
    let Ok(v) = std::env::var("HORIZONLAB_GUARD") else {
        return Ok(Guards::default());
    };
    if let Ok(n) = v.trim().parse::<u64>() {
        return Ok(Guards {
            max_terms: n,
            max_horizon: n,
            search_bound: n,
        });
    }
    let mut g = Guards::default();
    for part in v.split(',') {
        let (key, val) = part
            .split_once('=')
            .ok_or_else(|| CliError::Parse(format!("HORIZONLAB_GUARD entry {part:?} is not key=value")))?;
        let val = parse_num("guard", val)?;
        match key.trim() {
            "max_terms" => g.max_terms = val,
            "max_horizon" => g.max_horizon = val,
            "search_bound" => g.search_bound = val,
            k => return Err(CliError::Parse(format!("unknown guard {k:?}"))),
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discounts() {
        assert_eq!(parse_discount("geometric:0.9").unwrap(), DiscountSpec::geometric(0.9).unwrap());
        assert_eq!(parse_discount("finite:100").unwrap(), DiscountSpec::finite(100).unwrap());
        assert_eq!(parse_discount("power:1.5").unwrap(), DiscountSpec::power(1.5).unwrap());
        let scaled = parse_discount("quadratic*2.5").unwrap();
        assert_eq!(scaled.scale, 2.5);
        let az = parse_discount("alternating-zero:geometric:0.5").unwrap();
        assert_eq!(az, DiscountSpec::alternating_zero(DiscountFamily::Geometric { g: 0.5 }).unwrap());
        assert!(matches!(parse_discount("geometric:1.5"), Err(CliError::Core(_))));
        assert!(matches!(parse_discount("zeta:2"), Err(CliError::Parse(_))));
        assert!(matches!(parse_discount("quadratic:3"), Err(CliError::Parse(_))));
    }

    #[test]
    fn rewards_and_schedules() {
        assert_eq!(parse_reward("periodic:1,0,0").unwrap(), RewardSpec::periodic(vec![1.0, 0.0, 0.0]).unwrap());
        assert_eq!(parse_reward("change-points:1,2,4,8").unwrap(), RewardSpec::ExplicitChangePoints(vec![1, 2, 4, 8]));
        assert!(parse_reward("constant:2").is_err());
        assert_eq!(parse_schedule("dyadic:3").unwrap(), vec![1, 2, 4, 8]);
        assert_eq!(parse_schedule("list:3,5").unwrap(), vec![3, 5]);
        assert!(parse_schedule("dyadic:99").is_err());
    }
}
