use std::collections::BTreeMap;

use super::{differentiate, rational_to_f64, Expr, ExprError, FuncName, PI_NAME};

/// Denominators below this magnitude are treated as division by zero.
pub const SINGULARITY_THRESHOLD: f64 = 1e-300;

/// Concrete closed forms for function symbols plus numeric parameter values.
///
/// Derivative symbols such as `J''` are resolved by differentiating the bound
/// form symbolically; evaluation never uses finite differences.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileBinding {
    funcs: BTreeMap<FuncName, Expr>,
    params: BTreeMap<String, f64>,
    interval: (f64, f64),
}

impl Default for ProfileBinding {
    fn default() -> Self {
        ProfileBinding { funcs: BTreeMap::new(), params: BTreeMap::new(), interval: (0.0, 1.0) }
    }
}

impl ProfileBinding {
    pub fn new() -> Self {
        ProfileBinding::default()
    }

    /// Binds `name` to a closed form in `x`. Forms mentioning function
    /// symbols are rejected.
    pub fn bind(mut self, name: FuncName, form: Expr) -> Result<Self, ExprError> {
        if form.contains_func() {
            return Err(ExprError::ImpureBinding(name.to_string()));
        }
        self.funcs.insert(name, form);
        Ok(self)
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    /// Interval sampled by probabilistic equality checks.
    pub fn with_interval(mut self, lo: f64, hi: f64) -> Self {
        self.interval = (lo, hi);
        self
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn function(&self, name: FuncName) -> Option<&Expr> {
        self.funcs.get(&name)
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        match self.params.get(name) {
            Some(v) => Some(*v),
            None if name == PI_NAME => Some(std::f64::consts::PI),
            None => None,
        }
    }

    /// Substitutes every bound function symbol (and its derivatives) into
    /// `e`. Unbound function symbols are an error.
    pub fn resolve(&self, e: &Expr) -> Result<Expr, ExprError> {
        let mut cache: BTreeMap<FuncName, Vec<Expr>> = BTreeMap::new();
        self.resolve_with(e, &mut cache)
    }

    fn resolve_with(
        &self,
        e: &Expr,
        cache: &mut BTreeMap<FuncName, Vec<Expr>>,
    ) -> Result<Expr, ExprError> {
        Ok(match e {
            Expr::Func(s) => {
                let form = self.funcs.get(&s.name).ok_or_else(|| ExprError::Unbound(s.to_string()))?;
                let derivs = cache.entry(s.name).or_insert_with(|| vec![form.clone()]);
                while derivs.len() <= s.order as usize {
                    let next = differentiate(derivs.last().unwrap());
                    derivs.push(next);
                }
                derivs[s.order as usize].clone()
            }
            Expr::Const(_) | Expr::X | Expr::Param(_) => e.clone(),
            Expr::Sum(v) => Expr::Sum(v.iter().map(|t| self.resolve_with(t, cache)).collect::<Result<_, _>>()?),
            Expr::Product(v) => {
                Expr::Product(v.iter().map(|t| self.resolve_with(t, cache)).collect::<Result<_, _>>()?)
            }
            Expr::Pow(b, x) => Expr::Pow(Box::new(self.resolve_with(b, cache)?), x.clone()),
            Expr::Call(f, a) => Expr::Call(*f, Box::new(self.resolve_with(a, cache)?)),
        })
    }

    /// Prepares `e` for repeated evaluation.
    pub fn evaluator(&self, e: &Expr) -> Result<Evaluator<'_>, ExprError> {
        Ok(Evaluator { resolved: self.resolve(e)?, binding: self })
    }
}

/// An expression with all function symbols resolved against a binding.
#[derive(Debug, Clone)]
pub struct Evaluator<'b> {
    resolved: Expr,
    binding: &'b ProfileBinding,
}

impl Evaluator<'_> {
    pub fn at(&self, x: f64) -> Result<f64, ExprError> {
        eval_resolved(&self.resolved, self.binding, x)
    }
}

fn eval_resolved(e: &Expr, b: &ProfileBinding, x: f64) -> Result<f64, ExprError> {
    Ok(match e {
        Expr::Const(c) => rational_to_f64(c),
        Expr::X => x,
        Expr::Param(p) => b.param(p).ok_or_else(|| ExprError::Unbound(p.clone()))?,
        Expr::Func(s) => return Err(ExprError::Unbound(s.to_string())),
        Expr::Sum(v) => {
            let mut acc = 0.0;
            for t in v {
                acc += eval_resolved(t, b, x)?;
            }
            acc
        }
        Expr::Product(v) => {
            let mut acc = 1.0;
            for t in v {
                acc *= eval_resolved(t, b, x)?;
            }
            acc
        }
        Expr::Pow(base, exp) => {
            let v = eval_resolved(base, b, x)?;
            let p = exp.value(|name| b.param(name))?;
            if p < 0.0 && v.abs() < SINGULARITY_THRESHOLD {
                return Err(ExprError::Singularity {
                    x,
                    detail: format!("negative power of vanishing base `{base}`"),
                });
            }
            match exp.as_integer() {
                Some(n) if n.unsigned_abs() <= i32::MAX as u64 => v.powi(n as i32),
                _ if p.fract() == 0.0 => v.powf(p),
                _ if v < 0.0 => {
                    return Err(ExprError::Singularity {
                        x,
                        detail: format!("non-integer power {p} of negative base `{base}`"),
                    })
                }
                _ => v.powf(p),
            }
        }
        Expr::Call(f, a) => f.apply(eval_resolved(a, b, x)?),
    })
}

/// Evaluates `e` at `x`; function symbols and parameters must be bound.
pub fn eval(e: &Expr, b: &ProfileBinding, x: f64) -> Result<f64, ExprError> {
    b.evaluator(e)?.at(x)
}
