//! Name-keyed collections of interchangeable strategies.

use crate::error::{Error, Result};

/// Trait objects registered under stable names, looked up at runtime.
pub struct Registry<S: ?Sized> {
    kind: &'static str,
    entries: Vec<(&'static str, Box<S>)>,
}

impl<S: ?Sized> Registry<S> {
    pub fn new(kind: &'static str) -> Self {
        Self {
            kind,
            entries: Vec::new(),
        }
    }

    /// Adds a strategy; a later registration under the same name replaces the earlier one.
    pub fn register(&mut self, name: &'static str, strategy: Box<S>) -> &mut Self {
        match self.entries.iter_mut().find(|(n, _)| *n == name) {
            Some(slot) => slot.1 = strategy,
            None => self.entries.push((name, strategy)),
        }
        self
    }

    pub fn get(&self, name: &str) -> Result<&S> {
        self.entries
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, s)| s.as_ref())
            .ok_or_else(|| Error::UnknownStrategy {
                kind: self.kind,
                name: name.to_string(),
                available: self.names().map(str::to_string).collect(),
            })
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.iter().map(|(n, _)| *n)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, &S)> {
        self.entries.iter().map(|(n, s)| (*n, s.as_ref()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    trait Greeter {
        fn greet(&self) -> String;
    }

    struct Fixed(&'static str);

    impl Greeter for Fixed {
        fn greet(&self) -> String {
            self.0.to_string()
        }
    }

    #[test]
    fn lookup_and_replace() {
        let mut reg: Registry<dyn Greeter> = Registry::new("greeter");
        reg.register("a", Box::new(Fixed("one"))).register("b", Box::new(Fixed("two")));
        assert_eq!(reg.get("b").unwrap().greet(), "two");
        reg.register("b", Box::new(Fixed("three")));
        assert_eq!(reg.get("b").unwrap().greet(), "three");
        assert_eq!(reg.names().collect::<Vec<_>>(), ["a", "b"]);
        match reg.get("c") {
            Err(Error::UnknownStrategy { available, .. }) => assert_eq!(available, ["a", "b"]),
            _ => panic!("expected an unknown-strategy error"),
        }
    }
}
