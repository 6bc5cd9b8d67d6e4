//! Block-group arguments: `S<k>`, `C<k>`, or `@file.json`.
//!
//! A file holds either the full element list
//! `{"degree": 4, "elements": [[2,1,4,3], "(1 3)(2 4)", ...]}`
//! or generators `{"degree": 4, "generators": [...]}`; elements are one-line
//! image arrays (1-based) or cycle strings.

use std::fs;

use serde_json::Value;
use wreathlab::error::{Error, Result};
use wreathlab::perm::Permutation;
use wreathlab::wreath::{subgroup_closure, GroupSpec};

pub fn parse_group(arg: &str, cap: u128) -> Result<GroupSpec> {
    match arg.strip_prefix('@') {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::InvalidArgument(format!("{path}: {e}")))?;
            let v: Value = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{path}: {e}")))?;
            from_json(&v, cap)
        }
        None => GroupSpec::parse_named(arg),
    }
}

fn perm_from_json(v: &Value, degree: usize) -> Result<Permutation> {
    match v {
        Value::String(s) => Permutation::parse_cycles(s, degree),
        Value::Array(items) => {
            let images = items
                .iter()
                .map(|x| x.as_u64().map(|x| x as usize))
                .collect::<Option<Vec<usize>>>()
                .ok_or_else(|| Error::Parse("element images must be positive integers".into()))?;
            let p = Permutation::new(&images)?;
            if p.degree() != degree {
                return Err(Error::DegreeMismatch { left: degree, right: p.degree() });
            }
            Ok(p)
        }
        _ => Err(Error::Parse("element must be an array or a cycle string".into())),
    }
}

fn from_json(v: &Value, cap: u128) -> Result<GroupSpec> {
    let degree = v["degree"]
        .as_u64()
        .filter(|&d| d >= 1)
        .ok_or_else(|| Error::Parse("group file needs a positive \"degree\"".into()))? as usize;
    let list = |key: &str| -> Result<Option<Vec<Permutation>>> {
        match v.get(key) {
            None => Ok(None),
            Some(Value::Array(items)) => items.iter().map(|x| perm_from_json(x, degree)).collect::<Result<_>>().map(Some),
            Some(_) => Err(Error::Parse(format!("\"{key}\" must be a list"))),
        }
    };
    if let Some(elements) = list("elements")? {
        if elements.len() as u128 > cap {
            return Err(Error::CapExceeded { what: "explicit group", size: elements.len() as u128, cap });
        }
        return GroupSpec::explicit(elements);
    }
    if let Some(gens) = list("generators")? {
        if gens.is_empty() {
            return GroupSpec::explicit(vec![Permutation::identity(degree)]);
        }
        return subgroup_closure(&gens, cap.min(usize::MAX as u128) as usize);
    }
    Err(Error::Parse("group file needs \"elements\" or \"generators\"".into()))
}
