//! Helpers shared by the integration tests.
#![allow(dead_code)]

use serde_json::Value;

/// Minimal JSON Schema check: `type`, `enum`, `required`, `properties`,
/// `additionalProperties: false`, `items`, `minItems`, `maxItems`,
/// `minimum`, `maximum`, `exclusiveMinimum` and local `$ref`.
pub fn validate(v: &Value, schema: &Value) -> Result<(), String> {
    check(v, schema, schema, "$")
}

fn resolve<'a>(root: &'a Value, r: &str) -> Result<&'a Value, String> {
    let path = r.strip_prefix("#/").ok_or_else(|| format!("non-local $ref {r}"))?;
    path.split('/')
        .try_fold(root, |node, key| node.get(key))
        .ok_or_else(|| format!("dangling $ref {r}"))
}

fn type_ok(v: &Value, t: &str) -> bool {
    match t {
        "object" => v.is_object(),
        "array" => v.is_array(),
        "number" => v.is_number(),
        "integer" => v.is_i64() || v.is_u64(),
        "boolean" => v.is_boolean(),
        "string" => v.is_string(),
        "null" => v.is_null(),
        _ => false,
    }
}

fn check(v: &Value, s: &Value, root: &Value, at: &str) -> Result<(), String> {
    if let Some(r) = s.get("$ref").and_then(Value::as_str) {
        return check(v, resolve(root, r)?, root, at);
    }
    match s.get("type") {
        Some(Value::String(t)) if !type_ok(v, t) => return Err(format!("{at}: expected {t}, got {v}")),
        Some(Value::Array(ts)) if !ts.iter().filter_map(Value::as_str).any(|t| type_ok(v, t)) => {
            return Err(format!("{at}: {v} matches none of {ts:?}"));
        }
        _ => {}
    }
    if let Some(Value::Array(options)) = s.get("enum") {
        if !options.contains(v) {
            return Err(format!("{at}: {v} not in {options:?}"));
        }
    }
    if let Some(x) = v.as_f64() {
        let bound = |k: &str| s.get(k).and_then(Value::as_f64);
        if bound("minimum").is_some_and(|m| x < m)
            || bound("maximum").is_some_and(|m| x > m)
            || bound("exclusiveMinimum").is_some_and(|m| x <= m)
        {
            return Err(format!("{at}: {x} out of bounds"));
        }
    }
    if let Some(o) = v.as_object() {
        for key in s.get("required").and_then(Value::as_array).into_iter().flatten() {
            let key = key.as_str().unwrap_or_default();
            if !o.contains_key(key) {
                return Err(format!("{at}: missing {key}"));
            }
        }
        let props = s.get("properties").and_then(Value::as_object);
        for (k, x) in o {
            match props.and_then(|p| p.get(k)) {
                Some(sub) => check(x, sub, root, &format!("{at}.{k}"))?,
                None if s.get("additionalProperties") == Some(&Value::Bool(false)) => {
                    return Err(format!("{at}: unexpected {k}"));
                }
                None => {}
            }
        }
    }
    if let Some(a) = v.as_array() {
        let n = |k: &str| s.get(k).and_then(Value::as_u64).map(|x| x as usize);
        if n("minItems").is_some_and(|m| a.len() < m) || n("maxItems").is_some_and(|m| a.len() > m) {
            return Err(format!("{at}: {} items", a.len()));
        }
        if let Some(items) = s.get("items") {
            for (i, x) in a.iter().enumerate() {
                check(x, items, root, &format!("{at}[{i}]"))?;
            }
        }
    }
    Ok(())
}

/// Structural equality with numbers compared to `abs + rel·|b|`.
pub fn assert_close(a: &Value, b: &Value, abs: f64, rel: f64) {
    fn walk(a: &Value, b: &Value, abs: f64, rel: f64, at: &str) {
        match (a, b) {
            (Value::Number(x), Value::Number(y)) => {
                let (x, y) = (x.as_f64().unwrap(), y.as_f64().unwrap());
                assert!((x - y).abs() <= abs + rel * y.abs(), "{at}: {x} vs {y}");
            }
            (Value::Array(x), Value::Array(y)) => {
                assert_eq!(x.len(), y.len(), "{at}");
                for (i, (x, y)) in x.iter().zip(y).enumerate() {
                    walk(x, y, abs, rel, &format!("{at}[{i}]"));
                }
            }
            (Value::Object(x), Value::Object(y)) => {
                assert_eq!(x.keys().collect::<Vec<_>>(), y.keys().collect::<Vec<_>>(), "{at}");
                for (k, x) in x {
                    walk(x, &y[k], abs, rel, &format!("{at}.{k}"));
                }
            }
            _ => assert_eq!(a, b, "{at}"),
        }
    }
    walk(a, b, abs, rel, "$");
}
