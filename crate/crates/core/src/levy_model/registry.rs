use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::tail::TailModel;
use super::variants::{
    CompoundPoissonExp, GammaExp, LampertiKilled, Stable, StretchedExp, Tabulated, Tilted, Zero,
};
use crate::error::{Error, Result};

/// The `tail` object of a model file: a variant name plus its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailConfig {
    pub variant: String,
    #[serde(flatten)]
    pub params: Map<String, Value>,
}

impl TailConfig {
    pub fn of(tail: &dyn TailModel) -> Self {
        Self {
            variant: tail.name().to_string(),
            params: tail.params(),
        }
    }
}

/// Builds a tail from its parameters. Nested tails resolve through the registry.
pub type TailFactory = fn(&Map<String, Value>, &TailRegistry) -> Result<Arc<dyn TailModel>>;

/// Tail families by name.
#[derive(Clone)]
pub struct TailRegistry {
    factories: BTreeMap<String, TailFactory>,
}

impl std::fmt::Debug for TailRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.factories.keys()).finish()
    }
}

fn parse<T: DeserializeOwned>(variant: &str, params: &Map<String, Value>) -> Result<T> {
    serde_json::from_value(Value::Object(params.clone()))
        .map_err(|e| Error::InvalidSpec(format!("{variant}: {e}")))
}

fn number(params: &Map<String, Value>, key: &str) -> Result<f64> {
    params
        .get(key)
        .and_then(Value::as_f64)
        .ok_or_else(|| Error::InvalidSpec(format!("tilted: missing numeric field `{key}`")))
}

impl TailRegistry {
    pub fn empty() -> Self {
        Self {
            factories: BTreeMap::new(),
        }
    }

    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        r.register("zero", |p, _| {
            parse::<Zero>("zero", p)?;
            Ok(Arc::new(Zero {}))
        });
        r.register("stable", |p, _| {
            let s: Stable = parse("stable", p)?;
            Ok(Arc::new(Stable::new(s.a)?))
        });
        r.register("gamma_exp", |p, _| {
            let g: GammaExp = parse("gamma_exp", p)?;
            Ok(Arc::new(GammaExp::new(g.a, g.s, g.beta)?))
        });
        r.register("compound_poisson_exp", |p, _| {
            let c: CompoundPoissonExp = parse("compound_poisson_exp", p)?;
            Ok(Arc::new(CompoundPoissonExp::new(c.rate, c.decay)?))
        });
        r.register("lamperti_killed", |p, _| {
            let l: LampertiKilled = parse("lamperti_killed", p)?;
            Ok(Arc::new(LampertiKilled::new(l.a, l.beta)?))
        });
        r.register("stretched_exp", |p, _| {
            let s: StretchedExp = parse("stretched_exp", p)?;
            Ok(Arc::new(StretchedExp::new(s.b, s.n)?))
        });
        r.register("tabulated", |p, _| {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct Raw {
                knots: Vec<[f64; 2]>,
                #[serde(default = "three")]
                fit_knots: usize,
            }
            fn three() -> usize {
                3
            }
            let raw: Raw = parse("tabulated", p)?;
            Ok(Arc::new(Tabulated::new(&raw.knots, raw.fit_knots)?))
        });
        r.register("tilted", |p, reg| {
            for key in p.keys() {
                if !matches!(key.as_str(), "base" | "rho" | "kill") {
                    return Err(Error::InvalidSpec(format!("tilted: unknown field `{key}`")));
                }
            }
            let base: TailConfig = p
                .get("base")
                .cloned()
                .ok_or_else(|| Error::InvalidSpec("tilted: missing `base`".into()))
                .and_then(|v| parse("tilted.base", v.as_object().unwrap_or(&Map::new())))?;
            let base = reg.build(&base)?;
            let rho = number(p, "rho")?;
            let kill = p.get("kill").map_or(Ok(0.0), |_| number(p, "kill"))?;
            Tilted::new(base, rho, kill)
                .map(|t| Arc::new(t) as Arc<dyn TailModel>)
                .map_err(|e| Error::InvalidSpec(e.to_string()))
        });
        r
    }

    /// Shared registry with the built-in families.
    pub fn global() -> &'static TailRegistry {
        static REGISTRY: OnceLock<TailRegistry> = OnceLock::new();
        REGISTRY.get_or_init(TailRegistry::with_builtins)
    }

    pub fn register(&mut self, name: &str, factory: TailFactory) {
        self.factories.insert(name.to_string(), factory);
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.factories.keys().map(String::as_str)
    }

    pub fn build(&self, config: &TailConfig) -> Result<Arc<dyn TailModel>> {
        let factory = self.factories.get(&config.variant).ok_or_else(|| {
            let known: Vec<_> = self.names().collect();
            Error::InvalidSpec(format!(
                "unknown tail variant `{}` (known: {})",
                config.variant,
                known.join(", ")
            ))
        })?;
        factory(&config.params, self)
    }
}

impl Default for TailRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn config(v: Value) -> TailConfig {
        serde_json::from_value(v).unwrap()
    }

    #[test]
    fn builds_every_builtin() {
        let reg = TailRegistry::global();
        let cases = [
            json!({"variant": "zero"}),
            json!({"variant": "stable", "a": 0.25}),
            json!({"variant": "gamma_exp", "a": 0.5, "s": 1.0, "beta": 1.0}),
            json!({"variant": "compound_poisson_exp", "rate": 2.0, "decay": 0.5}),
            json!({"variant": "lamperti_killed", "a": 0.5, "beta": 1.0}),
            json!({"variant": "stretched_exp", "b": 0.25, "n": 2}),
            json!({"variant": "tabulated", "knots": [[0.5, 1.0], [1.0, 0.5], [2.0, 0.1]]}),
            json!({"variant": "tilted", "rho": 1.0, "kill": 0.5, "base": {"variant": "stable", "a": 0.5}}),
        ];
        for case in cases {
            let cfg = config(case.clone());
            let tail = reg.build(&cfg).unwrap();
            assert_eq!(tail.name(), cfg.variant);
            let again = TailConfig::of(tail.as_ref());
            let rebuilt = reg.build(&again).unwrap();
            assert_eq!(rebuilt.eval(0.7), tail.eval(0.7), "{case}");
        }
        assert_eq!(reg.names().count(), 8);
    }

    #[test]
    fn rejects_unknown_variant_and_fields() {
        let reg = TailRegistry::global();
        let err = reg.build(&config(json!({"variant": "levy"}))).unwrap_err();
        assert!(err.to_string().contains("unknown tail variant"));
        assert!(reg
            .build(&config(json!({"variant": "stable", "a": 0.5, "b": 1})))
            .is_err());
        assert!(reg.build(&config(json!({"variant": "stable"}))).is_err());
        assert!(reg
            .build(&config(json!({"variant": "stable", "a": 1.5})))
            .is_err());
        assert!(reg
            .build(&config(
                json!({"variant": "tilted", "rho": 0.0, "base": {"variant": "zero"}})
            ))
            .is_err());
    }

    #[test]
    fn custom_family_can_be_registered() {
        let mut reg = TailRegistry::with_builtins();
        reg.register("half_stable", |_, r| {
            r.build(&TailConfig {
                variant: "stable".into(),
                params: serde_json::from_value(json!({"a": 0.5})).unwrap(),
            })
        });
        let tail = reg
            .build(&config(json!({"variant": "half_stable"})))
            .unwrap();
        assert_eq!(tail.eval(4.0), 1.0);
    }
}
