use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("unknown identifier `{name}` at line {line}, column {col}")]
    UnknownIdentifier { name: String, line: usize, col: usize },
    #[error("function `{name}` expects {expected} argument(s), got {got} (line {line}, column {col})")]
    Arity { name: String, expected: usize, got: usize, line: usize, col: usize },
    #[error("derivative order {0} outside the supported range 1..=8")]
    UnsupportedOrder(usize),
    #[error("symbolic derivative unavailable: {0}")]
    NonDifferentiable(String),
    #[error("unknown catalog entry `{0}`")]
    UnknownCatalog(String),
    #[error("parameter `{name}` = {value} outside admissible range {range}")]
    ParamRange { name: String, value: f64, range: String },
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("derivative evaluation failed at {point:?}: {msg}")]
    Derivative { point: Vec<f64>, msg: String },
    #[error("negative value {value:e} at {point:?}")]
    Negative { point: Vec<f64>, value: f64 },
    #[error("cell budget exceeded: {reached} cells")]
    CellBudget { reached: usize },
    #[error("coverage hole at {0:?}")]
    CoverageHole(Vec<f64>),
    #[error("case II cell {cell} has no positive Hessian direction")]
    NoAxis { cell: usize },
    #[error("minimizer of cell {cell} sits at the bracket boundary (xi = {xi:?})")]
    BoundaryRoot { cell: usize, xi: Vec<f64> },
    #[error("Taylor factor H = {value:e} below its lower bound {bound:e} in cell {cell}")]
    FactorBound { cell: usize, value: f64, bound: f64 },
    #[error("recursion budget exceeded at depth {0}")]
    RecursionBudget(usize),
    #[error("functional requires psi")]
    MissingPsi,
    #[error("zero value with positive partner: f(x) = 0 at {x:?}, f(y) = {fy:e} at {y:?}")]
    Divergent { x: Vec<f64>, y: Vec<f64>, fy: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
