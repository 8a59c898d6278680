//! Recursive-descent parser for the `.tsc` dialect. Units are normalized
//! to SI (m, s, m/s, rad) at parse time; quantities are exact rationals.

use super::lexer::{lex, Tok, Token};
use crate::chart::{BasicChart, RequirementTsc};
use crate::diag::{ParseDiagnostic, Severity, SourceSpan};
use crate::model::{Attr, CarParams, Dimension, LaneState, WorldModel};
use crate::spec::{AnalysisSettings, ObjectDecl, Specification};
use crate::view::{
    AnchorTerm, Axis, CmpOp, DistArrow, Frame, FrameKind, OrderChain, SpatialView, VAtom,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use std::collections::BTreeSet;

pub struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    file: String,
    diags: Vec<ParseDiagnostic>,
}

type PResult<T> = Result<T, ()>;

pub fn parse_spec(text: &str, file: &str) -> Result<Specification, Vec<ParseDiagnostic>> {
    let tokens = match lex(text, file) {
        Ok(t) => t,
        Err(d) => return Err(vec![d]),
    };
    let mut p = Parser {
        tokens,
        pos: 0,
        file: file.to_string(),
        diags: Vec::new(),
    };
    match p.spec() {
        Ok(spec) => {
            p.validate(&spec);
            if p.diags.iter().any(|d| d.severity == Severity::Error) {
                Err(p.diags)
            } else {
                Ok(spec)
            }
        }
        Err(()) => Err(p.diags),
    }
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn span(&self) -> SourceSpan {
        self.tokens[self.pos].span.clone()
    }

    fn bump(&mut self) -> Tok {
        let t = self.tokens[self.pos].tok.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&mut self, message: impl Into<String>) -> PResult<T> {
        self.error_at(message, self.span())
    }

    fn error_at<T>(&mut self, message: impl Into<String>, span: SourceSpan) -> PResult<T> {
        self.diags.push(ParseDiagnostic {
            severity: Severity::Error,
            message: message.into(),
            span,
        });
        Err(())
    }

    fn expect_sym(&mut self, s: &'static str) -> PResult<()> {
        if self.peek() == &Tok::Sym(s) {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected '{}'", s))
        }
    }

    fn eat_sym(&mut self, s: &'static str) -> bool {
        if self.peek() == &Tok::Sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => self.error("expected identifier"),
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if let Tok::Ident(s) = self.peek() {
            if s == kw {
                self.bump();
                return true;
            }
        }
        false
    }

    // ---- top level ----

    fn spec(&mut self) -> PResult<Specification> {
        let mut spec = Specification::empty();
        loop {
            match self.peek().clone() {
                Tok::Eof => break,
                Tok::Ident(kw) => match kw.as_str() {
                    "world" => {
                        self.bump();
                        self.world_block(&mut spec.world)?;
                    }
                    "objects" => {
                        self.bump();
                        self.objects_block(&mut spec)?;
                    }
                    "view" => {
                        self.bump();
                        let v = self.view_block()?;
                        spec.views.push(v);
                    }
                    "chart" => {
                        self.bump();
                        let name = self.expect_ident()?;
                        self.expect_sym("=")?;
                        let chart = self.chart_expr(&spec)?;
                        self.expect_sym(";")?;
                        spec.charts.push((name, chart));
                    }
                    "tsc" => {
                        self.bump();
                        let t = self.tsc_block(&spec)?;
                        spec.tscs.push(t);
                    }
                    "analysis" => {
                        self.bump();
                        self.analysis_block(&mut spec.analysis)?;
                    }
                    other => {
                        return self.error(format!("unexpected top-level item '{}'", other));
                    }
                },
                _ => return self.error("expected top-level item"),
            }
        }
        Ok(spec)
    }

    fn world_block(&mut self, world: &mut WorldModel) -> PResult<()> {
        self.expect_sym("{")?;
        while !self.eat_sym("}") {
            if self.eat_keyword("gravity") {
                world.gravity = self.float_quantity(Dimension::Accel)?;
                self.expect_sym(";")?;
            } else if self.eat_keyword("car_params") {
                let params = self.car_params_block()?;
                world.car_params = params;
            } else {
                return self.error("expected 'gravity' or 'car_params'");
            }
        }
        Ok(())
    }

    fn car_params_block(&mut self) -> PResult<CarParams> {
        self.expect_sym("{")?;
        let mut p = CarParams::default();
        while !self.eat_sym("}") {
            let name = self.expect_ident()?;
            let dim = match name.as_str() {
                "G" | "L" | "F" | "W" => Dimension::Length,
                "delta_max" => Dimension::Angle,
                "a_lat_max" => Dimension::Accel,
                other => return self.error(format!("unknown vehicle parameter '{}'", other)),
            };
            let v = self.float_quantity(dim)?;
            match name.as_str() {
                "G" => p.rear_overhang = v,
                "L" => p.wheel_base = v,
                "F" => p.front_overhang = v,
                "W" => p.width = v,
                "delta_max" => p.delta_max = v,
                _ => p.a_lat_max = v,
            }
            self.expect_sym(";")?;
        }
        Ok(p)
    }

    fn objects_block(&mut self, spec: &mut Specification) -> PResult<()> {
        self.expect_sym("{")?;
        while !self.eat_sym("}") {
            let span = self.span();
            let name = self.expect_ident()?;
            self.expect_sym(":")?;
            let type_name = self.expect_ident()?;
            if spec.world.type_def(&type_name).is_none() {
                return self.error_at(format!("unknown object type '{}'", type_name), span);
            }
            let mut decl = ObjectDecl {
                name,
                type_name: type_name.clone(),
                fixed_lane: None,
                car_params: None,
            };
            if self.eat_sym("(") {
                if type_name == "Lane" {
                    decl.fixed_lane = Some(self.lane_args()?);
                } else {
                    decl.car_params = Some(self.car_args()?);
                }
            }
            self.expect_sym(";")?;
            spec.objects.push(decl);
        }
        Ok(())
    }

    fn lane_args(&mut self) -> PResult<LaneState> {
        let mut lane = LaneState::default();
        loop {
            let name = self.expect_ident()?;
            let v = self.float_quantity(Dimension::Length)?;
            match name.as_str() {
                "start" => lane.start = v,
                "length" => lane.length = v,
                "width" => lane.width = v,
                "offset" => lane.offset = v,
                other => return self.error(format!("unknown lane field '{}'", other)),
            }
            if self.eat_sym(")") {
                break;
            }
            self.expect_sym(",")?;
        }
        Ok(lane)
    }

    fn car_args(&mut self) -> PResult<CarParams> {
        let mut p = CarParams::default();
        loop {
            let name = self.expect_ident()?;
            let dim = match name.as_str() {
                "G" | "L" | "F" | "W" => Dimension::Length,
                "delta_max" => Dimension::Angle,
                "a_lat_max" => Dimension::Accel,
                other => return self.error(format!("unknown vehicle parameter '{}'", other)),
            };
            let v = self.float_quantity(dim)?;
            match name.as_str() {
                "G" => p.rear_overhang = v,
                "L" => p.wheel_base = v,
                "F" => p.front_overhang = v,
                "W" => p.width = v,
                "delta_max" => p.delta_max = v,
                _ => p.a_lat_max = v,
            }
            if self.eat_sym(")") {
                break;
            }
            self.expect_sym(",")?;
        }
        Ok(p)
    }

    // ---- views ----

    fn view_block(&mut self) -> PResult<SpatialView> {
        let name = self.expect_ident()?;
        let mut root = Frame::top();
        self.expect_sym("{")?;
        self.frame_items(&mut root)?;
        Ok(SpatialView { name, root })
    }

    fn frame_items(&mut self, frame: &mut Frame) -> PResult<()> {
        while !self.eat_sym("}") {
            match self.peek().clone() {
                Tok::Ident(kw) => match kw.as_str() {
                    "order_x" => {
                        self.bump();
                        let chain = self.order_chain(Axis::X)?;
                        frame.orders.push(chain);
                        self.expect_sym(";")?;
                    }
                    "order_y" => {
                        self.bump();
                        let chain = self.order_chain(Axis::Y)?;
                        frame.orders.push(chain);
                        self.expect_sym(";")?;
                    }
                    "dist_x" => {
                        self.bump();
                        let d = self.dist_arrow(Axis::X)?;
                        frame.dists.push(d);
                        self.expect_sym(";")?;
                    }
                    "dist_y" => {
                        self.bump();
                        let d = self.dist_arrow(Axis::Y)?;
                        frame.dists.push(d);
                        self.expect_sym(";")?;
                    }
                    "constraint" => {
                        self.bump();
                        let atom = self.constraint_atom()?;
                        frame.constraints.push(atom);
                        self.expect_sym(";")?;
                    }
                    "somewhere" | "nowhere" => {
                        self.bump();
                        let kind = if kw == "somewhere" {
                            FrameKind::Somewhere
                        } else {
                            FrameKind::Nowhere
                        };
                        let child = self.sub_frame(kind, Vec::new())?;
                        frame.children.push(child);
                    }
                    "exists" | "forbid" => {
                        self.bump();
                        let kind = if kw == "exists" {
                            FrameKind::Somewhere
                        } else {
                            FrameKind::Nowhere
                        };
                        let sym = self.expect_ident()?;
                        self.expect_sym(":")?;
                        let ty = self.expect_ident()?;
                        let child = self.sub_frame(kind, vec![(sym, ty)])?;
                        frame.children.push(child);
                    }
                    other => return self.error(format!("unexpected view item '{}'", other)),
                },
                _ => return self.error("expected view item"),
            }
        }
        Ok(())
    }

    fn sub_frame(&mut self, kind: FrameKind, binders: Vec<(String, String)>) -> PResult<Frame> {
        let mut frame = Frame {
            kind,
            constrain_x: true,
            constrain_y: true,
            binders,
            orders: Vec::new(),
            dists: Vec::new(),
            constraints: Vec::new(),
            children: Vec::new(),
        };
        if self.eat_sym("[") {
            let flags = self.expect_ident()?;
            match flags.as_str() {
                "x" => {
                    frame.constrain_y = false;
                }
                "y" => {
                    frame.constrain_x = false;
                }
                "xy" => {}
                other => return self.error(format!("unknown axis flags '{}'", other)),
            }
            self.expect_sym("]")?;
        }
        self.expect_sym("{")?;
        self.frame_items(&mut frame)?;
        Ok(frame)
    }

    fn anchor(&mut self) -> PResult<AnchorTerm> {
        let span = self.span();
        let sym = self.expect_ident()?;
        self.expect_sym(".")?;
        let attr_name = self.expect_ident()?;
        match Attr::parse(&attr_name) {
            Some(attr) => Ok(AnchorTerm { symbol: sym, attr }),
            None => self.error_at(format!("unknown attribute '{}'", attr_name), span),
        }
    }

    fn chain_rel(&mut self) -> Option<CmpOp> {
        if self.eat_sym("<") {
            Some(CmpOp::Lt)
        } else if self.eat_sym("<=") {
            Some(CmpOp::Le)
        } else if self.eat_sym("=") {
            Some(CmpOp::Eq)
        } else {
            None
        }
    }

    fn order_chain(&mut self, axis: Axis) -> PResult<OrderChain> {
        let mut anchors = vec![self.anchor()?];
        let mut relations = Vec::new();
        while let Some(rel) = self.chain_rel() {
            relations.push(rel);
            anchors.push(self.anchor()?);
        }
        if relations.is_empty() {
            return self.error("order chain needs at least two anchors");
        }
        Ok(OrderChain {
            axis,
            anchors,
            relations,
        })
    }

    fn cmp_op(&mut self) -> PResult<CmpOp> {
        if self.eat_sym("<=") {
            Ok(CmpOp::Le)
        } else if self.eat_sym("<") {
            Ok(CmpOp::Lt)
        } else if self.eat_sym(">=") {
            Ok(CmpOp::Ge)
        } else if self.eat_sym(">") {
            Ok(CmpOp::Gt)
        } else if self.eat_sym("=") {
            Ok(CmpOp::Eq)
        } else {
            self.error("expected comparison operator")
        }
    }

    fn dist_arrow(&mut self, axis: Axis) -> PResult<DistArrow> {
        let from = self.anchor()?;
        self.expect_sym("->")?;
        let to = self.anchor()?;
        let cmp = self.cmp_op()?;
        let bound = self.quantity(Dimension::Length)?;
        Ok(DistArrow {
            axis,
            from,
            to,
            cmp,
            bound,
        })
    }

    /// `lin_expr cmp lin_expr` with attribute terms and quantities.
    fn constraint_atom(&mut self) -> PResult<VAtom> {
        let (lhs_terms, lhs_const, lhs_dim) = self.lin_expr()?;
        let cmp = self.cmp_op()?;
        let (rhs_terms, rhs_const, rhs_dim) = self.lin_expr()?;
        if let (Some(a), Some(b)) = (lhs_dim, rhs_dim) {
            if a != b {
                return self.error("unit mismatch in constraint");
            }
        }
        // terms move left, constants right
        let mut terms = lhs_terms;
        for (c, t) in rhs_terms {
            terms.push((-c, t));
        }
        let rhs = rhs_const - lhs_const;
        if terms.is_empty() {
            return self.error("constraint has no attribute term");
        }
        Ok(VAtom { terms, cmp, rhs })
    }

    /// Returns (terms, constant, dimension-if-known).
    #[allow(clippy::type_complexity)]
    fn lin_expr(
        &mut self,
    ) -> PResult<(
        Vec<(BigRational, AnchorTerm)>,
        BigRational,
        Option<Dimension>,
    )> {
        let mut terms: Vec<(BigRational, AnchorTerm)> = Vec::new();
        let mut constant = BigRational::zero();
        let mut dim: Option<Dimension> = None;
        let mut sign = BigRational::from_integer(BigInt::from(1));
        let mut first = true;
        loop {
            if !first {
                if self.eat_sym("+") {
                    sign = BigRational::from_integer(BigInt::from(1));
                } else if self.eat_sym("-") {
                    sign = -BigRational::from_integer(BigInt::from(1));
                } else {
                    break;
                }
            } else {
                if self.eat_sym("-") {
                    sign = -BigRational::from_integer(BigInt::from(1));
                }
                first = false;
            }
            match self.peek().clone() {
                Tok::Number(_) => {
                    let n = self.number()?;
                    // optional coefficient `n * anchor`, else quantity
                    if self.eat_sym("*") {
                        let a = self.anchor()?;
                        merge_dim(&mut dim, a.attr.dimension(), self)?;
                        terms.push((&sign * &n, a));
                    } else {
                        let (value, qdim) = self.unit_suffix(n)?;
                        if let Some(qd) = qdim {
                            merge_dim(&mut dim, qd, self)?;
                        }
                        constant += &sign * &value;
                    }
                }
                Tok::Ident(_) => {
                    let a = self.anchor()?;
                    merge_dim(&mut dim, a.attr.dimension(), self)?;
                    terms.push((sign.clone(), a));
                }
                _ => return self.error("expected term"),
            }
        }
        Ok((terms, constant, dim))
    }

    fn number(&mut self) -> PResult<BigRational> {
        match self.peek().clone() {
            Tok::Number(s) => {
                self.bump();
                let first = parse_decimal(&s).expect("lexer produced a valid number");
                // Exact rational literal `p/q`.
                if self.peek() == &Tok::Sym("/") {
                    if let Tok::Number(d) = self.tokens[self.pos + 1].tok.clone() {
                        self.bump();
                        self.bump();
                        let den = parse_decimal(&d).expect("lexer produced a valid number");
                        if den.is_zero() {
                            return self.error("division by zero in rational literal");
                        }
                        return Ok(first / den);
                    }
                }
                Ok(first)
            }
            _ => self.error("expected number"),
        }
    }

    /// A float-valued quantity, parsed bit-exactly from the token text
    /// when no unit conversion applies.
    fn float_quantity(&mut self, expect: Dimension) -> PResult<f64> {
        let neg = self.eat_sym("-");
        let raw = match self.peek().clone() {
            Tok::Number(s) => {
                self.bump();
                s
            }
            _ => return self.error("expected number"),
        };
        let mut value: f64 = raw.parse().expect("lexer produced a valid number");
        if neg {
            value = -value;
        }
        let span = self.span();
        let dim = match self.peek().clone() {
            Tok::Ident(u) if matches!(u.as_str(), "m" | "s" | "kmh" | "deg" | "rad") => {
                self.bump();
                match u.as_str() {
                    "m" => {
                        if self.eat_sym("/") {
                            let d = self.expect_ident()?;
                            match d.as_str() {
                                "s" => Some(Dimension::Speed),
                                "s2" => Some(Dimension::Accel),
                                other => return self.error(format!("unknown unit 'm/{}'", other)),
                            }
                        } else {
                            Some(Dimension::Length)
                        }
                    }
                    "s" => Some(Dimension::Time),
                    "kmh" => {
                        value /= 3.6;
                        Some(Dimension::Speed)
                    }
                    "deg" => {
                        value = value.to_radians();
                        Some(Dimension::Angle)
                    }
                    _ => Some(Dimension::Angle),
                }
            }
            _ => None,
        };
        if let Some(d) = dim {
            if d != expect {
                return self.error_at("unit mismatch", span);
            }
        }
        Ok(value)
    }

    /// Parse `<number> [unit]` normalized to SI, checking the dimension.
    fn quantity(&mut self, expect: Dimension) -> PResult<BigRational> {
        let neg = self.eat_sym("-");
        let n = self.number()?;
        let n = if neg { -n } else { n };
        let span = self.span();
        let (value, dim) = self.unit_suffix(n)?;
        if let Some(d) = dim {
            if d != expect {
                return self.error_at("unit mismatch", span);
            }
        }
        Ok(value)
    }

    /// Consume an optional unit after a number; normalize to SI.
    fn unit_suffix(&mut self, n: BigRational) -> PResult<(BigRational, Option<Dimension>)> {
        let unit = match self.peek().clone() {
            Tok::Ident(u) if matches!(u.as_str(), "m" | "s" | "kmh" | "deg" | "rad") => {
                self.bump();
                u
            }
            _ => return Ok((n, None)),
        };
        match unit.as_str() {
            "m" => {
                if self.eat_sym("/") {
                    let d = self.expect_ident()?;
                    match d.as_str() {
                        "s" => Ok((n, Some(Dimension::Speed))),
                        "s2" => Ok((n, Some(Dimension::Accel))),
                        other => self.error(format!("unknown unit 'm/{}'", other)),
                    }
                } else {
                    Ok((n, Some(Dimension::Length)))
                }
            }
            "s" => Ok((n, Some(Dimension::Time))),
            "kmh" => Ok((
                n * BigRational::new(BigInt::from(5), BigInt::from(18)),
                Some(Dimension::Speed),
            )),
            "deg" => {
                let pi = BigRational::from_float(std::f64::consts::PI).unwrap();
                Ok((
                    n * pi / BigRational::from_integer(BigInt::from(180)),
                    Some(Dimension::Angle),
                ))
            }
            "rad" => Ok((n, Some(Dimension::Angle))),
            _ => unreachable!(),
        }
    }

    // ---- charts ----

    fn chart_expr(&mut self, spec: &Specification) -> PResult<BasicChart> {
        let mut left = self.conc_expr(spec)?;
        while self.eat_sym("|") {
            let right = self.conc_expr(spec)?;
            left = BasicChart::Choice(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn conc_expr(&mut self, spec: &Specification) -> PResult<BasicChart> {
        let mut rows = vec![self.seq_expr(spec)?];
        while self.eat_sym("&") {
            rows.push(self.seq_expr(spec)?);
        }
        if rows.len() == 1 {
            Ok(rows.pop().unwrap())
        } else {
            Ok(BasicChart::Concurrency(rows))
        }
    }

    /// Does the token after the current `;` begin a chart expression?
    /// Distinguishes the sequence operator from statement terminators.
    fn semicolon_is_sequence(&self) -> bool {
        match &self.tokens.get(self.pos + 1).map(|t| t.tok.clone()) {
            Some(Tok::Sym("[")) | Some(Tok::Sym("(")) => true,
            Some(Tok::Ident(s)) => !matches!(
                s.as_str(),
                "world"
                    | "objects"
                    | "view"
                    | "chart"
                    | "tsc"
                    | "analysis"
                    | "use"
                    | "history"
                    | "future"
                    | "consequence"
            ),
            _ => false,
        }
    }

    fn seq_expr(&mut self, spec: &Specification) -> PResult<BasicChart> {
        let mut left = self.postfix_expr(spec)?;
        while self.peek() == &Tok::Sym(";") && self.semicolon_is_sequence() {
            self.bump();
            let pin = if self.eat_sym("[") {
                let p = self.expect_ident()?;
                self.expect_sym("]")?;
                Some(p)
            } else {
                None
            };
            let right = self.postfix_expr(spec)?;
            left = BasicChart::Seq {
                left: Box::new(left),
                right: Box::new(right),
                pin,
            };
        }
        Ok(left)
    }

    fn postfix_expr(&mut self, spec: &Specification) -> PResult<BasicChart> {
        let body = self.primary_expr(spec)?;
        if self.eat_keyword("within") {
            let var = self.expect_ident()?;
            self.expect_sym(":")?;
            let mut constraint = Vec::new();
            loop {
                let dvar_span = self.span();
                let dvar = self.expect_ident()?;
                if dvar != var {
                    return self.error_at(
                        format!("hourglass constraint must be over '{}'", var),
                        dvar_span,
                    );
                }
                let cmp = self.cmp_op()?;
                let bound = self.quantity(Dimension::Time)?;
                constraint.push((cmp, bound));
                if !self.eat_sym("&&") {
                    break;
                }
            }
            return Ok(BasicChart::Hourglass {
                body: Box::new(body),
                var,
                constraint,
            });
        }
        Ok(body)
    }

    fn primary_expr(&mut self, spec: &Specification) -> PResult<BasicChart> {
        match self.peek().clone() {
            Tok::Ident(kw) if kw == "true" => {
                self.bump();
                Ok(BasicChart::Empty)
            }
            Tok::Ident(kw) if kw == "inv" => {
                self.bump();
                self.expect_sym("(")?;
                let span = self.span();
                let name = self.expect_ident()?;
                self.expect_sym(")")?;
                if spec.view(&name).is_none() {
                    return self.error_at(format!("unknown view '{}'", name), span);
                }
                Ok(BasicChart::Invariant(name))
            }
            Tok::Ident(kw) if kw == "sync" => {
                self.bump();
                self.expect_sym("[")?;
                let mut pins = Vec::new();
                loop {
                    let span = self.span();
                    let p = self.expect_ident()?;
                    if pins.contains(&p) {
                        return self.error_at(format!("pin label '{}' declared twice", p), span);
                    }
                    pins.push(p);
                    if !self.eat_sym(",") {
                        break;
                    }
                }
                self.expect_sym("]")?;
                self.expect_sym("(")?;
                let body = self.chart_expr(spec)?;
                self.expect_sym(")")?;
                Ok(BasicChart::PinSeq {
                    body: Box::new(body),
                    pins,
                })
            }
            Tok::Sym("(") => {
                self.bump();
                let inner = self.chart_expr(spec)?;
                self.expect_sym(")")?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                // Reference to a previously defined chart, inlined.
                let span = self.span();
                self.bump();
                match spec.chart(&name) {
                    Some(c) => Ok(c.clone()),
                    None => self.error_at(format!("unknown chart '{}'", name), span),
                }
            }
            _ => self.error("expected chart expression"),
        }
    }

    fn tsc_block(&mut self, spec: &Specification) -> PResult<RequirementTsc> {
        let name = self.expect_ident()?;
        self.expect_sym("{")?;
        let mut bulletin = Vec::new();
        let mut history = BasicChart::Empty;
        let mut future = BasicChart::Empty;
        let mut consequence = BasicChart::Empty;
        while !self.eat_sym("}") {
            if self.eat_keyword("use") {
                loop {
                    let span = self.span();
                    let sym = self.expect_ident()?;
                    match spec.object(&sym) {
                        Some(o) => bulletin.push((sym, o.type_name.clone())),
                        None => return self.error_at(format!("undeclared symbol {}", sym), span),
                    }
                    if !self.eat_sym(",") {
                        break;
                    }
                }
                self.expect_sym(";")?;
            } else if self.eat_keyword("history") {
                self.expect_sym("=")?;
                history = self.chart_expr(spec)?;
                self.expect_sym(";")?;
            } else if self.eat_keyword("future") {
                self.expect_sym("=")?;
                future = self.chart_expr(spec)?;
                self.expect_sym(";")?;
            } else if self.eat_keyword("consequence") {
                self.expect_sym("=")?;
                consequence = self.chart_expr(spec)?;
                self.expect_sym(";")?;
            } else {
                return self.error("expected 'use', 'history', 'future' or 'consequence'");
            }
        }
        Ok(RequirementTsc {
            name,
            bulletin,
            history,
            future,
            consequence,
        })
    }

    fn analysis_block(&mut self, settings: &mut AnalysisSettings) -> PResult<()> {
        self.expect_sym("{")?;
        while !self.eat_sym("}") {
            if self.eat_keyword("step") {
                settings.step = Some(self.quantity(Dimension::Time)?);
            } else if self.eat_keyword("depth") {
                settings.depth = Some(self.usize_value()?);
            } else if self.eat_keyword("intervals") {
                settings.intervals = Some(self.usize_value()?);
            } else if self.eat_keyword("timeout") {
                settings.timeout = Some(self.quantity(Dimension::Time)?);
            } else if self.eat_keyword("max_subset") {
                settings.max_subset = Some(self.usize_value()?);
            } else {
                return self.error("unknown analysis setting");
            }
            self.expect_sym(";")?;
        }
        Ok(())
    }

    fn usize_value(&mut self) -> PResult<usize> {
        let n = self.number()?;
        match n.to_integer().to_usize() {
            Some(v) if n.is_integer() => Ok(v),
            _ => self.error("expected a non-negative integer"),
        }
    }

    // ---- post-parse validation ----

    fn validate(&mut self, spec: &Specification) {
        let origin = SourceSpan::new(&self.file, 1, 1, 0);
        let mut seen = BTreeSet::new();
        for o in &spec.objects {
            if !seen.insert(o.name.clone()) {
                self.diags.push(ParseDiagnostic {
                    severity: Severity::Error,
                    message: format!("duplicate declaration of '{}'", o.name),
                    span: origin.clone(),
                });
            }
        }
        let mut vnames = BTreeSet::new();
        for v in &spec.views {
            if !vnames.insert(v.name.clone()) {
                self.diags.push(ParseDiagnostic {
                    severity: Severity::Error,
                    message: format!("duplicate view '{}'", v.name),
                    span: origin.clone(),
                });
            }
            self.validate_view(spec, v, &origin);
        }
        let mut cnames = BTreeSet::new();
        for (n, _) in &spec.charts {
            if !cnames.insert(n.clone()) {
                self.diags.push(ParseDiagnostic {
                    severity: Severity::Error,
                    message: format!("duplicate chart '{}'", n),
                    span: origin.clone(),
                });
            }
        }
        let mut tnames = BTreeSet::new();
        for t in &spec.tscs {
            if !tnames.insert(t.name.clone()) {
                self.diags.push(ParseDiagnostic {
                    severity: Severity::Error,
                    message: format!("duplicate tsc '{}'", t.name),
                    span: origin.clone(),
                });
            }
            // Free symbols of every referenced view must be in the bulletin.
            let bulletin: BTreeSet<String> = t.bulletin.iter().map(|(s, _)| s.clone()).collect();
            let mut views = BTreeSet::new();
            t.history.referenced_views(&mut views);
            t.future.referenced_views(&mut views);
            t.consequence.referenced_views(&mut views);
            for vn in views {
                if let Some(v) = spec.view(&vn) {
                    for sym in v.free_symbols() {
                        if !bulletin.contains(&sym) {
                            self.diags.push(ParseDiagnostic {
                                severity: Severity::Error,
                                message: format!(
                                    "view '{}' uses symbol '{}' missing from the bulletin board of tsc '{}'",
                                    vn, sym, t.name
                                ),
                                span: origin.clone(),
                            });
                        }
                    }
                }
            }
        }
        if spec.world.validate().is_err() {
            self.diags.push(ParseDiagnostic {
                severity: Severity::Error,
                message: "invalid world model".into(),
                span: origin,
            });
        }
    }

    fn validate_view(&mut self, spec: &Specification, view: &SpatialView, origin: &SourceSpan) {
        // Undeclared symbols: every free symbol must be a declared object.
        for sym in view.free_symbols() {
            if spec.object(&sym).is_none() {
                self.diags.push(ParseDiagnostic {
                    severity: Severity::Error,
                    message: format!("undeclared symbol {}", sym),
                    span: origin.clone(),
                });
            }
        }
        // Binder checks: no shadowing of declared objects, known types.
        let mut stack = vec![&view.root];
        while let Some(f) = stack.pop() {
            for (sym, ty) in &f.binders {
                if spec.object(sym).is_some() {
                    self.diags.push(ParseDiagnostic {
                        severity: Severity::Error,
                        message: format!("duplicate declaration of '{}'", sym),
                        span: origin.clone(),
                    });
                }
                if spec.world.type_def(ty).is_none() {
                    self.diags.push(ParseDiagnostic {
                        severity: Severity::Error,
                        message: format!("unknown object type '{}'", ty),
                        span: origin.clone(),
                    });
                }
            }
            for c in &f.children {
                stack.push(c);
            }
        }
    }
}

fn merge_dim(dim: &mut Option<Dimension>, new: Dimension, p: &mut Parser) -> PResult<()> {
    match dim {
        None => {
            *dim = Some(new);
            Ok(())
        }
        Some(d) if *d == new => Ok(()),
        Some(_) => p.error("unit mismatch in expression"),
    }
}

/// Exact decimal parsing: "3.5" -> 7/2.
pub fn parse_decimal(s: &str) -> Option<BigRational> {
    if let Some(dot) = s.find('.') {
        let int_part = &s[..dot];
        let frac = &s[dot + 1..];
        let digits = format!("{}{}", int_part, frac);
        let num: BigInt = digits.parse().ok()?;
        let den = BigInt::from(10u32).pow(frac.len() as u32);
        Some(BigRational::new(num, den))
    } else {
        let num: BigInt = s.parse().ok()?;
        Some(BigRational::from_integer(num))
    }
}
