//! Runtime values and their structural types.

use std::fmt;

/// Structural type of a value carried by a store.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ValueType {
    Unit,
    Bool,
    Int,
    Float,
    Str,
    List(Box<ValueType>),
    Tuple(Vec<ValueType>),
}

impl ValueType {
    pub fn list(inner: ValueType) -> Self {
        ValueType::List(Box::new(inner))
    }

    pub fn tuple(fields: impl IntoIterator<Item = ValueType>) -> Self {
        ValueType::Tuple(fields.into_iter().collect())
    }

    /// True for the types that render as a single text field.
    pub fn is_scalar(&self) -> bool {
        matches!(
            self,
            ValueType::Bool | ValueType::Int | ValueType::Float | ValueType::Str
        )
    }

    /// Element type when this is a list.
    pub fn element(&self) -> Option<&ValueType> {
        match self {
            ValueType::List(inner) => Some(inner),
            _ => None,
        }
    }
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueType::Unit => f.write_str("Unit"),
            ValueType::Bool => f.write_str("Bool"),
            ValueType::Int => f.write_str("Int"),
            ValueType::Float => f.write_str("Float"),
            ValueType::Str => f.write_str("Str"),
            ValueType::List(inner) => write!(f, "List<{inner}>"),
            ValueType::Tuple(fields) => {
                f.write_str("Tuple<")?;
                for (i, t) in fields.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{t}")?;
                }
                f.write_str(">")
            }
        }
    }
}

/// A dynamically typed value.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Unit,
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
    List(Vec<Value>),
    Tuple(Vec<Value>),
}

impl Value {
    pub fn str(s: impl Into<String>) -> Self {
        Value::Str(s.into())
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(i) => Some(*i),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Str(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Value]> {
        match self {
            Value::List(items) => Some(items),
            _ => None,
        }
    }

    pub fn into_list(self) -> Option<Vec<Value>> {
        match self {
            Value::List(items) => Some(items),
            _ => None,
        }
    }

    /// Checks this value against a structural type. Lists are checked
    /// element by element.
    pub fn conforms_to(&self, ty: &ValueType) -> bool {
        match (self, ty) {
            (Value::Unit, ValueType::Unit)
            | (Value::Bool(_), ValueType::Bool)
            | (Value::Int(_), ValueType::Int)
            | (Value::Float(_), ValueType::Float)
            | (Value::Str(_), ValueType::Str) => true,
            (Value::List(items), ValueType::List(inner)) => {
                items.iter().all(|v| v.conforms_to(inner))
            }
            (Value::Tuple(items), ValueType::Tuple(fields)) => {
                items.len() == fields.len()
                    && items.iter().zip(fields).all(|(v, t)| v.conforms_to(t))
            }
            _ => false,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Unit => f.write_str("()"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Float(x) => write!(f, "{x}"),
            Value::Str(s) => write!(f, "{s:?}"),
            Value::List(items) => {
                f.write_str("[")?;
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str("]")
            }
            Value::Tuple(items) => {
                f.write_str("(")?;
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Conversion between Rust types and [`Value`], used by the typed facade and
/// by `function_task` helpers.
pub trait ValueKind: Sized + Send + 'static {
    fn value_type() -> ValueType;
    fn into_value(self) -> Value;
    fn from_value(v: Value) -> Option<Self>;
}

impl ValueKind for () {
    fn value_type() -> ValueType {
        ValueType::Unit
    }
    fn into_value(self) -> Value {
        Value::Unit
    }
    fn from_value(v: Value) -> Option<Self> {
        matches!(v, Value::Unit).then_some(())
    }
}

impl ValueKind for bool {
    fn value_type() -> ValueType {
        ValueType::Bool
    }
    fn into_value(self) -> Value {
        Value::Bool(self)
    }
    fn from_value(v: Value) -> Option<Self> {
        match v {
            Value::Bool(b) => Some(b),
            _ => None,
        }
    }
}

impl ValueKind for i64 {
    fn value_type() -> ValueType {
        ValueType::Int
    }
    fn into_value(self) -> Value {
        Value::Int(self)
    }
    fn from_value(v: Value) -> Option<Self> {
        v.as_int()
    }
}

impl ValueKind for f64 {
    fn value_type() -> ValueType {
        ValueType::Float
    }
    fn into_value(self) -> Value {
        Value::Float(self)
    }
    fn from_value(v: Value) -> Option<Self> {
        match v {
            Value::Float(x) => Some(x),
            _ => None,
        }
    }
}

impl ValueKind for String {
    fn value_type() -> ValueType {
        ValueType::Str
    }
    fn into_value(self) -> Value {
        Value::Str(self)
    }
    fn from_value(v: Value) -> Option<Self> {
        match v {
            Value::Str(s) => Some(s),
            _ => None,
        }
    }
}

impl<T: ValueKind> ValueKind for Vec<T> {
    fn value_type() -> ValueType {
        ValueType::list(T::value_type())
    }
    fn into_value(self) -> Value {
        Value::List(self.into_iter().map(ValueKind::into_value).collect())
    }
    fn from_value(v: Value) -> Option<Self> {
        v.into_list()?.into_iter().map(T::from_value).collect()
    }
}

impl<A: ValueKind, B: ValueKind> ValueKind for (A, B) {
    fn value_type() -> ValueType {
        ValueType::tuple([A::value_type(), B::value_type()])
    }
    fn into_value(self) -> Value {
        Value::Tuple(vec![self.0.into_value(), self.1.into_value()])
    }
    fn from_value(v: Value) -> Option<Self> {
        match v {
            Value::Tuple(items) if items.len() == 2 => {
                let mut it = items.into_iter();
                let a = A::from_value(it.next()?)?;
                let b = B::from_value(it.next()?)?;
                Some((a, b))
            }
            _ => None,
        }
    }
}

impl<A: ValueKind, B: ValueKind, C: ValueKind> ValueKind for (A, B, C) {
    fn value_type() -> ValueType {
        ValueType::tuple([A::value_type(), B::value_type(), C::value_type()])
    }
    fn into_value(self) -> Value {
        Value::Tuple(vec![
            self.0.into_value(),
            self.1.into_value(),
            self.2.into_value(),
        ])
    }
    fn from_value(v: Value) -> Option<Self> {
        match v {
            Value::Tuple(items) if items.len() == 3 => {
                let mut it = items.into_iter();
                let a = A::from_value(it.next()?)?;
                let b = B::from_value(it.next()?)?;
                let c = C::from_value(it.next()?)?;
                Some((a, b, c))
            }
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_nested_types() {
        let t = ValueType::list(ValueType::tuple([ValueType::Str, ValueType::Int]));
        assert_eq!(t.to_string(), "List<Tuple<Str, Int>>");
    }

    #[test]
    fn conformance_checks_every_element() {
        let t = ValueType::list(ValueType::Int);
        assert!(Value::List(vec![Value::Int(1), Value::Int(2)]).conforms_to(&t));
        assert!(!Value::List(vec![Value::Int(1), Value::str("x")]).conforms_to(&t));
        assert!(Value::List(vec![]).conforms_to(&t));
        let pair = ValueType::tuple([ValueType::Str, ValueType::Int]);
        assert!(!Value::Tuple(vec![Value::str("a")]).conforms_to(&pair));
    }

    #[test]
    fn kind_round_trip() {
        let v = vec![("a".to_string(), 3i64), ("b".to_string(), 4)];
        let back = <Vec<(String, i64)>>::from_value(v.clone().into_value()).unwrap();
        assert_eq!(back, v);
        assert_eq!(
            <Vec<(String, i64)>>::value_type(),
            ValueType::list(ValueType::tuple([ValueType::Str, ValueType::Int]))
        );
    }
}
