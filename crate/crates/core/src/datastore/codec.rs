//! Text encodings for the file-backed stores.
//!
//! - `FileStore`: one element per line, every line LF-terminated.
//! - `CommaSepFile`: a single line of comma-separated elements, no quoting.
//! - `CSVStore`: one LF-terminated row per element; tuple fields are
//!   comma-separated, no quoting, no header.

use crate::value::{Value, ValueType};

use super::StoreError;

/// How a file kind lays out a list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    Lines,
    CommaSeparated,
    Csv,
}

impl Layout {
    pub fn extension(self) -> &'static str {
        match self {
            Layout::Lines => "txt",
            Layout::CommaSeparated => "csl",
            Layout::Csv => "csv",
        }
    }

    pub fn supports(self, ty: &ValueType) -> bool {
        let Some(elem) = ty.element() else {
            return false;
        };
        match self {
            Layout::Lines | Layout::CommaSeparated => elem.is_scalar(),
            Layout::Csv => match elem {
                ValueType::Tuple(fields) => {
                    !fields.is_empty() && fields.iter().all(ValueType::is_scalar)
                }
                other => other.is_scalar(),
            },
        }
    }

    pub fn encode(self, value: &Value, ty: &ValueType) -> Result<String, StoreError> {
        if !self.supports(ty) {
            return Err(StoreError::Encode(format!("{self:?} cannot encode {ty}")));
        }
        let items = value
            .as_list()
            .ok_or_else(|| StoreError::Encode(format!("expected a list, got {value}")))?;
        let mut out = String::new();
        match self {
            Layout::Lines => {
                for item in items {
                    let field = render_scalar(item, &['\n'])?;
                    out.push_str(&field);
                    out.push('\n');
                }
            }
            Layout::CommaSeparated => {
                if items.len() == 1 && items[0].as_str() == Some("") {
                    return Err(StoreError::Encode(
                        "a single empty value is indistinguishable from an empty list".into(),
                    ));
                }
                let fields = items
                    .iter()
                    .map(|v| render_scalar(v, &[',', '\n']))
                    .collect::<Result<Vec<_>, _>>()?;
                out.push_str(&fields.join(","));
            }
            Layout::Csv => {
                for item in items {
                    match item {
                        Value::Tuple(fields) => {
                            let fields = fields
                                .iter()
                                .map(|v| render_scalar(v, &[',', '\n']))
                                .collect::<Result<Vec<_>, _>>()?;
                            out.push_str(&fields.join(","));
                        }
                        scalar => out.push_str(&render_scalar(scalar, &[',', '\n'])?),
                    }
                    out.push('\n');
                }
            }
        }
        Ok(out)
    }

    pub fn decode(self, text: &str, ty: &ValueType) -> Result<Value, StoreError> {
        let elem = match ty.element() {
            Some(elem) if self.supports(ty) => elem,
            _ => {
                return Err(StoreError::TypeMismatch {
                    expected: ty.to_string(),
                    found: format!("{self:?} file"),
                })
            }
        };
        let items = match self {
            Layout::Lines => split_lines(text)
                .enumerate()
                .map(|(i, line)| parse_scalar(line, elem, i + 1))
                .collect::<Result<Vec<_>, _>>()?,
            Layout::CommaSeparated => {
                let line = text.strip_suffix('\n').unwrap_or(text);
                if line.contains('\n') {
                    return Err(StoreError::Decode {
                        line: 2,
                        message: "comma-separated file must be a single line".into(),
                    });
                }
                if line.is_empty() {
                    Vec::new()
                } else {
                    line.split(',')
                        .map(|field| parse_scalar(field, elem, 1))
                        .collect::<Result<Vec<_>, _>>()?
                }
            }
            Layout::Csv => split_lines(text)
                .enumerate()
                .map(|(i, row)| parse_row(row, elem, i + 1))
                .collect::<Result<Vec<_>, _>>()?,
        };
        Ok(Value::List(items))
    }
}

fn split_lines(text: &str) -> impl Iterator<Item = &str> {
    let body = text.strip_suffix('\n').unwrap_or(text);
    let empty = text.is_empty();
    body.split('\n').filter(move |_| !empty)
}

fn render_scalar(v: &Value, forbidden: &[char]) -> Result<String, StoreError> {
    match v {
        Value::Bool(b) => Ok(b.to_string()),
        Value::Int(i) => Ok(i.to_string()),
        Value::Float(x) => Ok(x.to_string()),
        Value::Str(s) => {
            if let Some(c) = s.chars().find(|c| forbidden.contains(c)) {
                Err(StoreError::Encode(format!("value {s:?} contains {c:?}")))
            } else {
                Ok(s.clone())
            }
        }
        other => Err(StoreError::Encode(format!("{other} is not a scalar"))),
    }
}

fn parse_scalar(field: &str, ty: &ValueType, line: usize) -> Result<Value, StoreError> {
    let bad = |what: &str| StoreError::Decode {
        line,
        message: format!("cannot parse {field:?} as {what}"),
    };
    match ty {
        ValueType::Str => Ok(Value::Str(field.to_string())),
        ValueType::Int => field.parse().map(Value::Int).map_err(|_| bad("Int")),
        ValueType::Float => field.parse().map(Value::Float).map_err(|_| bad("Float")),
        ValueType::Bool => field.parse().map(Value::Bool).map_err(|_| bad("Bool")),
        other => Err(bad(&other.to_string())),
    }
}

fn parse_row(row: &str, ty: &ValueType, line: usize) -> Result<Value, StoreError> {
    match ty {
        ValueType::Tuple(fields) => {
            let parts: Vec<&str> = row.split(',').collect();
            if parts.len() != fields.len() {
                return Err(StoreError::Decode {
                    line,
                    message: format!("expected {} fields, found {}", fields.len(), parts.len()),
                });
            }
            parts
                .iter()
                .zip(fields)
                .map(|(p, t)| parse_scalar(p, t, line))
                .collect::<Result<Vec<_>, _>>()
                .map(Value::Tuple)
        }
        scalar => parse_scalar(row, scalar, line),
    }
}
