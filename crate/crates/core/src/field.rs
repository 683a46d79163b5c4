//! Scalar fields: the evaluator abstraction shared by expression-backed and
//! composite (flow-backed) metric components.
//!
//! A field takes its arguments as jets of whatever ambient dimension the
//! caller is differentiating in; jet arithmetic composes, so fields nest
//! freely (an expression evaluated at flow-mapped jets picks up the chain
//! rule automatically).

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exprlang::{Env, Expr};
use crate::jets::Jet2;

pub trait ScalarField: Send + Sync {
    /// Number of arguments the field expects.
    fn arity(&self) -> usize;

    /// Evaluate at jet-valued arguments (all of one ambient dimension).
    fn eval(&self, args: &[Jet2]) -> Result<Jet2>;
}

pub type Field = Arc<dyn ScalarField>;

/// An expression bound to an ordered argument list plus named constants.
pub struct ExprField {
    expr: Expr,
    vars: Vec<String>,
    params: Vec<(String, f64)>,
}

impl ExprField {
    pub fn new(expr: Expr, vars: &[String], params: &[(String, f64)]) -> ExprField {
        ExprField {
            expr,
            vars: vars.to_vec(),
            params: params.to_vec(),
        }
    }

    pub fn shared(expr: Expr, vars: &[String], params: &[(String, f64)]) -> Field {
        Arc::new(ExprField::new(expr, vars, params))
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }
}

impl ScalarField for ExprField {
    fn arity(&self) -> usize {
        self.vars.len()
    }

    fn eval(&self, args: &[Jet2]) -> Result<Jet2> {
        debug_assert_eq!(args.len(), self.vars.len());
        let env = Env::new(&self.vars, args.to_vec()).with_params(&self.params);
        Ok(self.expr.eval(&env)?)
    }
}

/// A field backed by a closure.
pub struct FnField<F> {
    arity: usize,
    f: F,
}

impl<F> FnField<F>
where
    F: Fn(&[Jet2]) -> Result<Jet2> + Send + Sync + 'static,
{
    pub fn shared(arity: usize, f: F) -> Field {
        Arc::new(FnField { arity, f })
    }
}

impl<F> ScalarField for FnField<F>
where
    F: Fn(&[Jet2]) -> Result<Jet2> + Send + Sync,
{
    fn arity(&self) -> usize {
        self.arity
    }

    fn eval(&self, args: &[Jet2]) -> Result<Jet2> {
        (self.f)(args)
    }
}

pub fn const_field(arity: usize, value: f64) -> Field {
    FnField::shared(arity, move |args: &[Jet2]| {
        let dim = args.first().map_or(0, Jet2::dim);
        Ok(Jet2::constant(dim, value))
    })
}

pub fn zero_field(arity: usize) -> Field {
    const_field(arity, 0.0)
}

/// Evaluate a field at a plain point with all coordinates active.
pub fn eval_at_point(field: &dyn ScalarField, point: &[f64]) -> Result<Jet2> {
    let dim = point.len();
    if field.arity() != dim {
        return Err(Error::Construction(format!(
            "field arity {} does not match point dimension {}",
            field.arity(),
            dim
        )));
    }
    let args: Vec<Jet2> = point
        .iter()
        .enumerate()
        .map(|(i, &v)| Jet2::variable(dim, i, v))
        .collect::<Result<_, _>>()
        .map_err(Error::Jet)?;
    field.eval(&args)
}
