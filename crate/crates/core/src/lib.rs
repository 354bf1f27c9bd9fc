//! Conservation laws of scalar second-order evolution equations `u_t = H(t,x,u,u_x,u_xx)`.

pub mod expr;

pub use expr::{parse, parse_declarations, Declarations, Expr, FunctionSymbol, Rational, Var};
pub mod jet;

pub use jet::{antiderivative_x, euler, total_t, total_x, EvolutionEquation, JetError};
pub mod catalog;
pub mod classify;
pub mod claws;
pub mod verify;
