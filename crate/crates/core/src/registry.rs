//! Name-keyed factories for interchangeable strategies.

use serde::de::DeserializeOwned;
use serde_json::Value;

use crate::error::{invalid, Error, Result};

pub type Factory<T> = fn(&Value) -> Result<Box<T>>;

/// Strategies of one kind, selectable by name from configuration.
pub struct Registry<T: ?Sized> {
    kind: &'static str,
    entries: Vec<(&'static str, Factory<T>)>,
}

impl<T: ?Sized> Registry<T> {
    pub fn new(kind: &'static str) -> Self {
        Registry {
            kind,
            entries: Vec::new(),
        }
    }

    /// Adds or replaces the factory registered under `name`.
    pub fn register(mut self, name: &'static str, factory: Factory<T>) -> Self {
        self.entries.retain(|(n, _)| *n != name);
        self.entries.push((name, factory));
        self
    }

    pub fn kind(&self) -> &'static str {
        self.kind
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|(n, _)| *n).collect()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.iter().any(|(n, _)| *n == name)
    }

    /// Instantiates `name` with `params` (`null` selects the defaults).
    pub fn build(&self, name: &str, params: &Value) -> Result<Box<T>> {
        let factory = self
            .entries
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, f)| *f)
            .ok_or_else(|| Error::UnknownStrategy {
                kind: self.kind,
                name: name.to_string(),
                known: self.names().join(", "),
            })?;
        factory(params)
    }
}

/// Deserializes strategy parameters, treating `null` as all defaults.
pub fn parse_params<P: DeserializeOwned + Default>(params: &Value) -> Result<P> {
    if params.is_null() {
        return Ok(P::default());
    }
    P::deserialize(params).map_err(|e| invalid(format!("strategy parameters: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    trait Shape {
        fn sides(&self) -> usize;
    }

    #[derive(Default, Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Poly {
        #[serde(default)]
        n: usize,
    }

    impl Shape for Poly {
        fn sides(&self) -> usize {
            self.n
        }
    }

    fn poly(v: &Value) -> Result<Box<dyn Shape>> {
        Ok(Box::new(parse_params::<Poly>(v)?))
    }

    #[test]
    fn build_by_name() {
        let r: Registry<dyn Shape> = Registry::new("shape").register("poly", poly);
        assert_eq!(r.build("poly", &serde_json::json!({"n": 5})).unwrap().sides(), 5);
        assert_eq!(r.build("poly", &Value::Null).unwrap().sides(), 0);
        assert!(r.build("poly", &serde_json::json!({"m": 1})).is_err());
        assert!(matches!(
            r.build("circle", &Value::Null),
            Err(Error::UnknownStrategy { .. })
        ));
        assert_eq!(r.names(), vec!["poly"]);
    }
}
