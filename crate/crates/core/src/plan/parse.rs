use thiserror::Error;

use super::{PlanProgram, PlanStep, TitleKey, WrefAmount, WrefMode};
use crate::math::{Axis, Vec3};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("line {line}: {message} (at '{token}')")]
pub struct ParseError {
    /// 1-based line number.
    pub line: usize,
    pub token: String,
    pub message: String,
}

fn err(line: usize, token: impl Into<String>, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        token: token.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Slot(String),
}

impl Tok {
    fn text(&self) -> String {
        match self {
            Tok::Word(w) => w.clone(),
            Tok::Slot(s) => format!("[{s}]"),
        }
    }
}

fn tokenize(sentence: &str, line: usize) -> Result<Vec<Tok>, ParseError> {
    let mut out = Vec::new();
    let mut chars = sentence.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
        } else if c == '[' {
            chars.next();
            let mut body = String::new();
            loop {
                match chars.next() {
                    Some(']') => break,
                    Some('[') | None => return Err(err(line, format!("[{body}"), "unclosed '['")),
                    Some(ch) => body.push(ch),
                }
            }
            out.push(Tok::Slot(body.trim().to_string()));
        } else {
            let mut w = String::new();
            while let Some(&ch) = chars.peek() {
                if ch.is_whitespace() || ch == '[' {
                    break;
                }
                if ch == ']' {
                    return Err(err(line, "]", "unmatched ']'"));
                }
                w.push(ch);
                chars.next();
            }
            out.push(Tok::Word(w));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy)]
enum Part {
    Lit(&'static str),
    Id,
    Num,
    Axis,
    Mode,
    Amount,
    Vec3,
    XyzAxes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    RotateSelf,
    RotateWref,
    TranslateTarObj,
    TranslateDirecAxis,
}

impl Kind {
    fn label(self) -> &'static str {
        match self {
            Kind::RotateSelf => "rotate_self",
            Kind::RotateWref => "rotate_wref",
            Kind::TranslateTarObj => "translate_tar_obj",
            Kind::TranslateDirecAxis => "translate_direc_axis",
        }
    }

    fn from_label(s: &str) -> Option<Kind> {
        [Kind::RotateSelf, Kind::RotateWref, Kind::TranslateTarObj, Kind::TranslateDirecAxis]
            .into_iter()
            .find(|k| k.label() == s)
    }

    fn template(self) -> Vec<Part> {
        use Part::*;
        let head = [Lit("Manipulating"), Lit("Object"), Id];
        let mut t = Vec::new();
        match self {
            Kind::RotateSelf => {
                t.push(Lit("Rotate"));
                t.extend(head);
                t.extend([Lit("around"), Lit("its"), Lit("local"), Lit("axis"), Axis, Lit("by"), Num, Lit("degrees")]);
            }
            Kind::RotateWref => {
                t.push(Lit("Rotate"));
                t.extend(head);
                t.extend([Lit("relative"), Lit("to"), Lit("Target"), Lit("Object"), Id, Lit("around"), Mode, Lit("axis"), Lit("by"), Amount]);
            }
            Kind::TranslateTarObj => {
                t.push(Lit("Move"));
                t.extend(head);
                t.extend([
                    Lit("to"),
                    Vec3,
                    Lit("cm"),
                    Lit("relative"),
                    Lit("to"),
                    Lit("Target"),
                    Lit("Object"),
                    Id,
                    Lit("'s"),
                    Lit("local"),
                    XyzAxes,
                    Lit("axes"),
                ]);
            }
            Kind::TranslateDirecAxis => {
                t.push(Lit("Move"));
                t.extend(head);
                t.extend([
                    Num,
                    Lit("cm"),
                    Lit("along"),
                    Lit("the"),
                    Lit("directional"),
                    Lit("vector"),
                    Lit("from"),
                    Lit("Reference"),
                    Lit("Object"),
                    Id,
                    Lit("to"),
                    Lit("Reference"),
                    Lit("Object"),
                    Id,
                ]);
            }
        }
        t
    }
}

#[derive(Debug, Clone, Copy)]
enum Value {
    Id(u32),
    Num(f64),
    Axis(Axis),
    Mode(WrefMode),
    Amount(WrefAmount),
    Vec3(Vec3),
}

fn normalize_word(w: &str) -> String {
    let w = w.to_ascii_lowercase().replace('\u{2019}', "'");
    if w == "obj" {
        "object".to_string()
    } else {
        w
    }
}

/// Signed integer or decimal; no exponents, no special values.
pub(crate) fn parse_number(s: &str) -> Option<f64> {
    let body = s.strip_prefix(['+', '-']).unwrap_or(s);
    let (int, frac) = match body.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (body, None),
    };
    let digits = |p: &str| p.chars().all(|c| c.is_ascii_digit());
    let ok = digits(int) && frac.is_none_or(digits) && (!int.is_empty() || frac.is_some_and(|f| !f.is_empty()));
    if !ok {
        return None;
    }
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn parse_id(s: &str) -> Option<u32> {
    let s = s.trim();
    let bound = s.rsplit_once('\u{2192}').or_else(|| s.rsplit_once("->")).map(|(_, v)| v.trim());
    bound.unwrap_or(s).parse::<u32>().ok()
}

fn parse_fixed(s: &str) -> Option<WrefAmount> {
    let k: String = s.chars().filter(|c| !matches!(c, '_' | '-' | ' ')).collect::<String>().to_ascii_lowercase();
    match k.as_str() {
        "fixedtowards" => Some(WrefAmount::FixedTowards),
        "fixedback" => Some(WrefAmount::FixedBack),
        _ => None,
    }
}

/// Match `toks` against a template; on failure report how far it got.
fn match_template(kind: Kind, toks: &[Tok], line: usize) -> Result<Vec<Value>, (usize, ParseError)> {
    let mut vals = Vec::new();
    let mut i = 0;
    let fail = |i: usize, expected: String| {
        let token = toks.get(i).map(Tok::text).unwrap_or_else(|| "<end of line>".to_string());
        (i, err(line, token, format!("{}: expected {expected}", kind.label())))
    };
    let slot = |i: usize| match toks.get(i) {
        Some(Tok::Slot(s)) => Some(s.clone()),
        _ => None,
    };
    for part in kind.template() {
        match part {
            Part::Lit(w) => match toks.get(i) {
                Some(Tok::Word(t)) if normalize_word(t) == normalize_word(w) => i += 1,
                _ => return Err(fail(i, format!("'{w}'"))),
            },
            Part::Id => {
                let v = slot(i).and_then(|s| parse_id(&s)).ok_or_else(|| fail(i, "[object index]".into()))?;
                vals.push(Value::Id(v));
                i += 1;
            }
            Part::Num => {
                let v = slot(i).and_then(|s| parse_number(&s)).ok_or_else(|| fail(i, "[number]".into()))?;
                vals.push(Value::Num(v));
                i += 1;
            }
            Part::Axis => {
                let v = slot(i).and_then(|s| s.parse::<Axis>().ok()).ok_or_else(|| fail(i, "[x], [y] or [z]".into()))?;
                vals.push(Value::Axis(v));
                i += 1;
            }
            Part::Mode => {
                let v = slot(i)
                    .and_then(|s| match s.to_ascii_lowercase().as_str() {
                        "pitch" => Some(WrefMode::Pitch),
                        "yaw" => Some(WrefMode::Yaw),
                        "roll" => Some(WrefMode::Roll),
                        _ => None,
                    })
                    .ok_or_else(|| fail(i, "[pitch], [yaw] or [roll]".into()))?;
                vals.push(Value::Mode(v));
                i += 1;
            }
            Part::Amount => {
                let s = slot(i).ok_or_else(|| fail(i, "[degrees], [fixed_towards] or [fixed_back]".into()))?;
                if let Some(d) = parse_number(&s) {
                    i += 1;
                    match toks.get(i) {
                        Some(Tok::Word(t)) if normalize_word(t) == "degrees" => i += 1,
                        _ => return Err(fail(i, "'degrees'".into())),
                    }
                    vals.push(Value::Amount(WrefAmount::Degrees(d)));
                } else if let Some(f) = parse_fixed(&s) {
                    i += 1;
                    if matches!(toks.get(i), Some(Tok::Word(t)) if normalize_word(t) == "degrees") {
                        i += 1;
                    }
                    vals.push(Value::Amount(f));
                } else {
                    return Err(fail(i, "[degrees], [fixed_towards] or [fixed_back]".into()));
                }
            }
            Part::Vec3 => {
                let v = slot(i)
                    .and_then(|s| {
                        let parts: Vec<Option<f64>> = s.split(',').map(|p| parse_number(p.trim())).collect();
                        match parts.as_slice() {
                            [Some(a), Some(b), Some(c)] => Some(Vec3::new(*a, *b, *c)),
                            _ => None,
                        }
                    })
                    .ok_or_else(|| fail(i, "[a, b, c]".into()))?;
                vals.push(Value::Vec3(v));
                i += 1;
            }
            Part::XyzAxes => {
                let ok = slot(i).is_some_and(|s| s.replace(' ', "").eq_ignore_ascii_case("x,y,z"));
                if !ok {
                    return Err(fail(i, "[x, y, z]".into()));
                }
                i += 1;
            }
        }
    }
    if i < toks.len() {
        return Err(fail(i, "end of sentence".into()));
    }
    Ok(vals)
}

fn build_step(kind: Kind, v: &[Value]) -> PlanStep {
    use Value as V;
    match (kind, v) {
        (Kind::RotateSelf, [V::Id(obj), V::Axis(axis), V::Num(degrees)]) => PlanStep::RotateSelf {
            obj: *obj,
            axis: *axis,
            degrees: *degrees,
        },
        (Kind::RotateWref, [V::Id(obj), V::Id(target), V::Mode(mode), V::Amount(amount)]) => PlanStep::RotateWref {
            obj: *obj,
            target: *target,
            mode: *mode,
            amount: *amount,
        },
        (Kind::TranslateTarObj, [V::Id(obj), V::Vec3(offset), V::Id(target)]) => PlanStep::TranslateTarObj {
            obj: *obj,
            target: *target,
            offset: *offset,
        },
        (Kind::TranslateDirecAxis, [V::Id(obj), V::Num(distance), V::Id(ref1), V::Id(ref2)]) => PlanStep::TranslateDirecAxis {
            obj: *obj,
            ref1: *ref1,
            ref2: *ref2,
            distance: *distance,
        },
        _ => unreachable!("template and builder agree"),
    }
}

fn parse_step(body: &str, line: usize) -> Result<PlanStep, ParseError> {
    let body = body.trim();
    let (label, sentence) = match body.split_once(':') {
        Some((head, rest)) if !head.contains(char::is_whitespace) && !head.contains('[') => {
            let kind = Kind::from_label(&head.to_ascii_lowercase()).ok_or_else(|| err(line, head, "unknown operation"))?;
            (Some(kind), rest)
        }
        _ => (None, body),
    };
    let sentence = sentence.split_whitespace().collect::<Vec<_>>().join(" ");
    let sentence = sentence.trim_end_matches(|c: char| c == '.' || c.is_whitespace());
    let toks = tokenize(sentence, line)?;
    let kinds: Vec<Kind> = match label {
        Some(k) => vec![k],
        None => vec![Kind::RotateSelf, Kind::RotateWref, Kind::TranslateTarObj, Kind::TranslateDirecAxis],
    };
    let mut best: Option<(usize, ParseError)> = None;
    for kind in kinds {
        match match_template(kind, &toks, line) {
            Ok(vals) => {
                let step = build_step(kind, &vals);
                if let PlanStep::TranslateDirecAxis { ref1, ref2, .. } = step {
                    if ref1 == ref2 {
                        return Err(err(line, format!("[{ref2}]"), "reference object indices must differ"));
                    }
                }
                return Ok(step);
            }
            Err((depth, e)) => {
                if best.as_ref().is_none_or(|(d, _)| depth > *d) {
                    best = Some((depth, e));
                }
            }
        }
    }
    let (_, e) = best.expect("at least one template was tried");
    if label.is_none() && toks.len() < 2 {
        return Err(err(line, toks.first().map(Tok::text).unwrap_or_default(), "unknown operation"));
    }
    Err(e)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Header {
    TaskName,
    TaskCategory,
    Description,
    MotionPlanning,
    Manipulating,
    Interacting,
}

fn header_key(key: &str) -> Option<Header> {
    let k = key.split_whitespace().collect::<Vec<_>>().join(" ").to_ascii_lowercase();
    Some(match k.as_str() {
        "task name" => Header::TaskName,
        "task category" => Header::TaskCategory,
        "description" => Header::Description,
        "motion planning" => Header::MotionPlanning,
        "manipulating obj idx" | "manipulating object idx" => Header::Manipulating,
        "interacting obj idx" | "interacting object idx" => Header::Interacting,
        _ => return None,
    })
}

/// `N.` prefix of a step line, with the remainder.
fn step_prefix(line: &str) -> Option<(&str, &str)> {
    let t = line.trim_start();
    let end = t.find(|c: char| !c.is_ascii_digit())?;
    if end == 0 || !t[end..].starts_with('.') {
        return None;
    }
    Some((&t[..end], &t[end + 1..]))
}

pub fn parse_plan(text: &str) -> Result<PlanProgram, ParseError> {
    let mut title: Option<(TitleKey, String)> = None;
    let mut description = None;
    let mut marker = false;
    let mut manipulating = None;
    let mut interacting = None;
    let mut steps = Vec::new();
    let mut last_number: Option<u64> = None;
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        if raw.trim().is_empty() {
            continue;
        }
        if let Some((num, rest)) = step_prefix(raw) {
            let n: u64 = num.parse().map_err(|_| err(line, num, "step number out of range"))?;
            if last_number.is_some_and(|p| n <= p) {
                return Err(err(line, format!("{num}."), "step numbers must increase"));
            }
            last_number = Some(n);
            steps.push(parse_step(rest, line)?);
            continue;
        }
        let Some((key, value)) = raw.split_once(':') else {
            let tok = raw.split_whitespace().next().unwrap_or_default();
            return Err(err(line, tok, "unrecognized line"));
        };
        let Some(h) = header_key(key) else {
            return Err(err(line, key.trim(), "unknown header"));
        };
        let value = value.trim();
        let dup = || err(line, key.trim(), "duplicate header");
        let id = |v: &str| parse_id(v).ok_or_else(|| err(line, v, "object index must be a non-negative integer"));
        match h {
            Header::TaskName | Header::TaskCategory => {
                if title.is_some() {
                    return Err(dup());
                }
                if value.is_empty() {
                    return Err(err(line, key.trim(), "empty task name"));
                }
                let k = if h == Header::TaskName { TitleKey::Name } else { TitleKey::Category };
                title = Some((k, value.to_string()));
            }
            Header::Description => {
                if description.is_some() {
                    return Err(dup());
                }
                description = Some(value.to_string());
            }
            Header::MotionPlanning => {
                if marker {
                    return Err(dup());
                }
                marker = true;
            }
            Header::Manipulating => {
                if manipulating.is_some() {
                    return Err(dup());
                }
                manipulating = Some(id(value)?);
            }
            Header::Interacting => {
                if interacting.is_some() {
                    return Err(dup());
                }
                interacting = Some(id(value)?);
            }
        }
    }
    let end = last_line.max(1);
    let (title_key, task_name) = title.ok_or_else(|| err(1, "", "missing 'Task Name' header"))?;
    let manipulating_id = manipulating.ok_or_else(|| err(1, "", "missing 'Manipulating obj idx' header"))?;
    let interacting_id = interacting.ok_or_else(|| err(1, "", "missing 'Interacting obj idx' header"))?;
    if steps.is_empty() {
        return Err(err(end, "", "plan has no steps"));
    }
    Ok(PlanProgram {
        task_name,
        title_key,
        description,
        motion_planning_marker: marker,
        manipulating_id,
        interacting_id,
        steps,
    })
}
