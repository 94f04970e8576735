use std::f64::consts::PI;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Sqrt,
    Arccos,
    Arcsin,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "sqrt" => Func::Sqrt,
            "arccos" => Func::Arccos,
            "arcsin" => Func::Arcsin,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sqrt => "sqrt",
            Func::Arccos => "arccos",
            Func::Arcsin => "arcsin",
        }
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Tan => x.tan(),
            Func::Sqrt => x.sqrt(),
            Func::Arccos => x.acos(),
            Func::Arcsin => x.asin(),
        }
    }
}

/// Scalar expression tree. Variables carry the index of their parameter.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Pi,
    Var { name: String, index: usize },
    Neg(Box<Expr>),
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Pow { base: Box<Expr>, exp: i32 },
    Call { func: Func, arg: Box<Expr> },
}

impl Expr {
    pub fn eval(&self, vars: &[f64]) -> f64 {
        match self {
            Expr::Num(x) => *x,
            Expr::Pi => PI,
            Expr::Var { index, .. } => vars[*index],
            Expr::Neg(e) => -e.eval(vars),
            Expr::Binary { op, lhs, rhs } => {
                let (a, b) = (lhs.eval(vars), rhs.eval(vars));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                }
            }
            Expr::Pow { base, exp } => base.eval(vars).powi(*exp),
            Expr::Call { func, arg } => func.apply(arg.eval(vars)),
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Num(_) | Expr::Pi => true,
            Expr::Var { .. } => false,
            Expr::Neg(e) => e.is_constant(),
            Expr::Binary { lhs, rhs, .. } => lhs.is_constant() && rhs.is_constant(),
            Expr::Pow { base, .. } => base.is_constant(),
            Expr::Call { arg, .. } => arg.is_constant(),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary { op, .. } => op.precedence(),
            Expr::Neg(_) => 3,
            Expr::Pow { .. } => 4,
            _ => 5,
        }
    }

    fn write_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let paren = self.precedence() < min;
        if paren {
            f.write_str("(")?;
        }
        match self {
            Expr::Num(x) => write!(f, "{x:?}")?,
            Expr::Pi => f.write_str("pi")?,
            Expr::Var { name, .. } => f.write_str(name)?,
            Expr::Neg(e) => {
                f.write_str("-")?;
                e.write_prec(f, 3)?;
            }
            Expr::Binary { op, lhs, rhs } => {
                let p = op.precedence();
                lhs.write_prec(f, p)?;
                write!(f, " {} ", op.symbol())?;
                rhs.write_prec(f, p + 1)?;
            }
            Expr::Pow { base, exp } => {
                base.write_prec(f, 5)?;
                write!(f, "^{exp}")?;
            }
            Expr::Call { func, arg } => {
                write!(f, "{}(", func.name())?;
                arg.write_prec(f, 0)?;
                f.write_str(")")?;
            }
        }
        if paren {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_prec(f, 0)
    }
}

/// Group a chart claims to parametrise. `Su2` charts produce the 4×4 left
/// multiplication matrix of a unit quaternion and cover SO(3) twice.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChartGroup {
    So2,
    So3,
    O2,
    O3,
    Su2,
    None,
}

impl ChartGroup {
    pub fn from_parts(name: &str, dim: Option<i64>) -> Option<ChartGroup> {
        Some(match (name, dim) {
            ("so", Some(2)) => ChartGroup::So2,
            ("so", Some(3)) => ChartGroup::So3,
            ("o", Some(2)) => ChartGroup::O2,
            ("o", Some(3)) => ChartGroup::O3,
            ("su", Some(2)) => ChartGroup::Su2,
            ("none", None) => ChartGroup::None,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ChartGroup::So2 => "so(2)",
            ChartGroup::So3 => "so(3)",
            ChartGroup::O2 => "o(2)",
            ChartGroup::O3 => "o(3)",
            ChartGroup::Su2 => "su(2)",
            ChartGroup::None => "none",
        }
    }

    /// Expected `(matrix size, parameter count)`.
    pub fn shape(self) -> Option<(usize, usize)> {
        match self {
            ChartGroup::So2 | ChartGroup::O2 => Some((2, 1)),
            ChartGroup::So3 | ChartGroup::O3 => Some((3, 3)),
            ChartGroup::Su2 => Some((4, 3)),
            ChartGroup::None => None,
        }
    }

    pub fn is_orthogonal(self) -> bool {
        self != ChartGroup::None
    }
}

impl fmt::Display for ChartGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParamDecl {
    pub name: String,
    pub lower: Expr,
    pub upper: Expr,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChartAst {
    pub name: String,
    pub params: Vec<ParamDecl>,
    pub group: Option<ChartGroup>,
    pub matrix: Vec<Vec<Expr>>,
}

impl ChartAst {
    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn matrix_dim(&self) -> usize {
        self.matrix.len()
    }

    pub fn bounds(&self) -> Vec<(f64, f64)> {
        self.params
            .iter()
            .map(|p| (p.lower.eval(&[]), p.upper.eval(&[])))
            .collect()
    }
}

impl fmt::Display for ChartAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "chart {} {{", self.name)?;
        let params: Vec<String> = self
            .params
            .iter()
            .map(|p| format!("{} in [{}, {}]", p.name, p.lower, p.upper))
            .collect();
        writeln!(f, "    params: {};", params.join(", "))?;
        if let Some(g) = self.group {
            writeln!(f, "    group: {g};")?;
        }
        writeln!(f, "    matrix: [")?;
        for (i, row) in self.matrix.iter().enumerate() {
            let cells: Vec<String> = row.iter().map(|e| e.to_string()).collect();
            let sep = if i + 1 < self.matrix.len() { "," } else { "" };
            writeln!(f, "        [{}]{sep}", cells.join(", "))?;
        }
        writeln!(f, "    ];")?;
        f.write_str("}\n")
    }
}
