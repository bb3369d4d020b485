//! Text scenario files.
//!
//! ```text
//! [locations]
//! 1 2 3 4
//!
//! [links]
//! # from to a b
//! 1 2 1 20
//!
//! [requirements]
//! # origin destination amount
//! 1 4 10
//!
//! [goods]
//! G_0 numeraire
//! G_1
//!
//! [agents]
//! consumer name=c1 utility=cobb-douglas weights=0.5,0.5 endowment=1,0
//! producer name=p1 output=G_1 input=G_0 a=1 b=2
//!
//! [session]
//! model = carriers
//! seed = 7
//! ```
//!
//! Transport scenarios use the first three sections, exchange economies the
//! goods and agents sections. `#` starts a comment.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::agents::{Consumer, ConsumerSpec, Producer, ProducerSpec, Utility};
use crate::error::ScenarioError;
use crate::market::{Economy, Good, GoodId, ProfitShare, Scheduler, SessionConfig};
use crate::oracle::ExchangeEconomy;
use crate::transport::{
    build_config, BuildOptions, Link, MarketConfig, Model, Network, Requirement,
};

/// The four-location example network with its two requirements.
pub const FOUR_LOCATION: &str = include_str!("../data/four_location.cfg");

/// What kind of economy a scenario runs as.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelChoice {
    Transport(Model),
    Exchange,
}

impl FromStr for ModelChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "exchange" {
            return Ok(Self::Exchange);
        }
        s.parse::<Model>()
            .map(Self::Transport)
            .map_err(|_| format!("unknown model `{s}` (basic, carriers, arbitrageurs, exchange)"))
    }
}

impl fmt::Display for ModelChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Transport(m) => m.fmt(f),
            Self::Exchange => f.write_str("exchange"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoodDecl {
    pub label: String,
    pub numeraire: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsumerDecl {
    pub name: String,
    /// Goods are every declared good, in declaration order.
    pub spec: ConsumerSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProducerDecl {
    pub name: String,
    pub spec: ProducerSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub network: Option<Network>,
    pub requirements: Vec<Requirement>,
    pub goods: Vec<GoodDecl>,
    pub consumers: Vec<ConsumerDecl>,
    pub producers: Vec<ProducerDecl>,
    /// Model named in the file, if any.
    pub model: Option<ModelChoice>,
    pub session: SessionConfig,
    pub build: BuildOptions,
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Locations,
    Links,
    Requirements,
    Goods,
    Agents,
    Session,
}

fn field<T: FromStr>(line: usize, name: &str, raw: &str) -> Result<T, ScenarioError>
where
    T::Err: fmt::Display,
{
    raw.parse::<T>().map_err(|e| ScenarioError::Field {
        line,
        field: name.to_string(),
        message: format!("cannot parse `{raw}`: {e}"),
    })
}

fn list(line: usize, name: &str, raw: &str) -> Result<Vec<f64>, ScenarioError> {
    raw.split(',')
        .map(|v| field(line, name, v.trim()))
        .collect()
}

fn bad(line: usize, name: &str, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Field {
        line,
        field: name.to_string(),
        message: message.into(),
    }
}

fn columns<'a>(line: usize, text: &'a str, names: &[&str]) -> Result<Vec<&'a str>, ScenarioError> {
    let cols: Vec<&str> = text.split_whitespace().collect();
    if cols.len() != names.len() {
        return Err(ScenarioError::Syntax {
            line,
            message: format!(
                "expected {} fields ({}), found {}",
                names.len(),
                names.join(" "),
                cols.len()
            ),
        });
    }
    Ok(cols)
}

/// `kind key=value ...` with each key at most once.
fn key_values(line: usize, text: &str) -> Result<(String, Vec<(String, String)>), ScenarioError> {
    let mut it = text.split_whitespace();
    let kind = it.next().unwrap_or_default().to_string();
    let mut pairs: Vec<(String, String)> = Vec::new();
    for tok in it {
        let (k, v) = tok.split_once('=').ok_or_else(|| ScenarioError::Syntax {
            line,
            message: format!("expected key=value, found `{tok}`"),
        })?;
        if pairs.iter().any(|(seen, _)| seen == k) {
            return Err(bad(line, k, "given twice"));
        }
        pairs.push((k.to_string(), v.to_string()));
    }
    Ok((kind, pairs))
}

struct Pending {
    line: usize,
    kind: String,
    pairs: Vec<(String, String)>,
}

impl Pending {
    fn take(&mut self, key: &str) -> Option<String> {
        let i = self.pairs.iter().position(|(k, _)| k == key)?;
        Some(self.pairs.remove(i).1)
    }

    fn require(&mut self, key: &str) -> Result<String, ScenarioError> {
        self.take(key).ok_or_else(|| bad(self.line, key, "missing"))
    }

    fn finish(&self) -> Result<(), ScenarioError> {
        match self.pairs.first() {
            Some((k, _)) => Err(bad(self.line, k, format!("unknown key for {}", self.kind))),
            None => Ok(()),
        }
    }
}

fn set_session(line: usize, key: &str, value: &str, s: &mut Scenario) -> Result<(), ScenarioError> {
    let cfg = &mut s.session;
    let b = &mut s.build;
    match key {
        "model" => s.model = Some(field(line, key, value)?),
        "seed" => cfg.seed = field(line, key, value)?,
        "tolerance" => cfg.tolerance = field(line, key, value)?,
        "max_cycles" => cfg.max_cycles = field(line, key, value)?,
        "scheduler" => cfg.scheduler = field::<Scheduler>(line, key, value)?,
        "price_min" => cfg.price_min = field(line, key, value)?,
        "price_max" => cfg.price_max = field(line, key, value)?,
        "price_tolerance" => cfg.price_tolerance = field(line, key, value)?,
        "initial_price" => cfg.initial_price = field(line, key, value)?,
        "endowment" => b.shipper.endowment = field(line, key, value)?,
        "ramp_width" => b.shipper.ramp_width = field(line, key, value)?,
        "cap_by_holdings" => b.shipper.cap_by_holdings = field(line, key, value)?,
        "bid_price_max" => b.shipper.price_max = field(line, key, value)?,
        "arbitrage_step" => b.arbitrage_step = field(line, key, value)?,
        "trade_resource" => b.trade_resource = field(line, key, value)?,
        _ => return Err(bad(line, key, "unknown session key")),
    }
    Ok(())
}

impl Scenario {
    pub fn empty() -> Self {
        Self {
            network: None,
            requirements: Vec::new(),
            goods: Vec::new(),
            consumers: Vec::new(),
            producers: Vec::new(),
            model: None,
            session: SessionConfig::default(),
            build: BuildOptions::default(),
        }
    }

    pub fn four_location() -> Self {
        Self::parse(FOUR_LOCATION).expect("bundled scenario parses")
    }

    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        let mut s = Self::empty();
        let mut section = Section::None;
        let mut locations: Vec<u32> = Vec::new();
        let mut links: Vec<(usize, Link)> = Vec::new();
        let mut reqs: Vec<(usize, Requirement)> = Vec::new();
        let mut agents: Vec<Pending> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            if let Some(name) = body.strip_prefix('[').and_then(|b| b.strip_suffix(']')) {
                section = match name.trim() {
                    "locations" => Section::Locations,
                    "links" => Section::Links,
                    "requirements" => Section::Requirements,
                    "goods" => Section::Goods,
                    "agents" => Section::Agents,
                    "session" => Section::Session,
                    other => {
                        return Err(ScenarioError::Syntax {
                            line,
                            message: format!("unknown section `{other}`"),
                        })
                    }
                };
                continue;
            }
            match section {
                Section::None => {
                    return Err(ScenarioError::Syntax {
                        line,
                        message: "content before the first section header".into(),
                    })
                }
                Section::Locations => {
                    for tok in body.split_whitespace() {
                        locations.push(field(line, "location", tok)?);
                    }
                }
                Section::Links => {
                    let c = columns(line, body, &["from", "to", "a", "b"])?;
                    let l = Link::new(
                        field(line, "from", c[0])?,
                        field(line, "to", c[1])?,
                        field(line, "a", c[2])?,
                        field(line, "b", c[3])?,
                    );
                    if l.from == l.to {
                        return Err(bad(
                            line,
                            "to",
                            format!("link {}->{} is a self-loop", l.from, l.to),
                        ));
                    }
                    if !(l.a > 0.0 && l.a.is_finite()) {
                        return Err(bad(line, "a", format!("must be positive, got {}", l.a)));
                    }
                    if !(l.b >= 0.0 && l.b.is_finite()) {
                        return Err(bad(line, "b", format!("must be nonnegative, got {}", l.b)));
                    }
                    links.push((line, l));
                }
                Section::Requirements => {
                    let c = columns(line, body, &["origin", "destination", "amount"])?;
                    let r = Requirement::new(
                        field(line, "origin", c[0])?,
                        field(line, "destination", c[1])?,
                        field(line, "amount", c[2])?,
                    );
                    if !(r.amount > 0.0 && r.amount.is_finite()) {
                        return Err(bad(
                            line,
                            "amount",
                            format!("must be positive, got {}", r.amount),
                        ));
                    }
                    reqs.push((line, r));
                }
                Section::Goods => {
                    let cols: Vec<&str> = body.split_whitespace().collect();
                    let numeraire = match cols.as_slice() {
                        [_] => false,
                        [_, "numeraire"] => true,
                        _ => {
                            return Err(ScenarioError::Syntax {
                                line,
                                message: "expected `label` or `label numeraire`".into(),
                            })
                        }
                    };
                    if s.goods.iter().any(|g| g.label == cols[0]) {
                        return Err(bad(
                            line,
                            "label",
                            format!("good `{}` declared twice", cols[0]),
                        ));
                    }
                    s.goods.push(GoodDecl {
                        label: cols[0].to_string(),
                        numeraire,
                    });
                }
                Section::Agents => {
                    let (kind, pairs) = key_values(line, body)?;
                    agents.push(Pending { line, kind, pairs });
                }
                Section::Session => {
                    let (k, v) = body.split_once('=').ok_or_else(|| ScenarioError::Syntax {
                        line,
                        message: "expected `key = value`".into(),
                    })?;
                    set_session(line, k.trim(), v.trim(), &mut s)?;
                }
            }
        }

        if s.goods.iter().filter(|g| g.numeraire).count() > 1 {
            return Err(ScenarioError::Economy(
                "more than one numéraire good".into(),
            ));
        }
        for mut a in agents {
            s.add_agent(&mut a)?;
        }
        if !links.is_empty() || !locations.is_empty() {
            for &(line, l) in &links {
                for (name, id) in [("from", l.from), ("to", l.to)] {
                    if !locations.contains(&id) {
                        return Err(bad(line, name, format!("location {id} is not listed")));
                    }
                }
            }
            let net = Network::new(locations, links.iter().map(|(_, l)| *l).collect())?;
            for &(line, r) in &reqs {
                net.check_requirement(&r)
                    .map_err(|e| bad(line, "destination", e.to_string()))?;
            }
            s.network = Some(net);
        } else if let Some((line, _)) = reqs.first() {
            return Err(bad(*line, "origin", "requirements need a network"));
        }
        s.requirements = reqs.into_iter().map(|(_, r)| r).collect();
        s.session
            .validate()
            .map_err(|e| ScenarioError::Economy(e.to_string()))?;
        Ok(s)
    }

    fn good_id(&self, line: usize, key: &str, label: &str) -> Result<GoodId, ScenarioError> {
        self.goods
            .iter()
            .position(|g| g.label == label)
            .map(GoodId)
            .ok_or_else(|| bad(line, key, format!("unknown good `{label}`")))
    }

    fn add_agent(&mut self, a: &mut Pending) -> Result<(), ScenarioError> {
        let line = a.line;
        let name = a.require("name")?;
        if self.consumers.iter().any(|c| c.name == name)
            || self.producers.iter().any(|p| p.name == name)
        {
            return Err(bad(line, "name", format!("agent `{name}` declared twice")));
        }
        match a.kind.as_str() {
            "consumer" => {
                let family = a.require("utility")?;
                let weights = list(line, "weights", &a.require("weights")?)?;
                let endowment = list(line, "endowment", &a.require("endowment")?)?;
                let utility = match family.as_str() {
                    "cobb-douglas" => Utility::CobbDouglas { weights },
                    "ces" => Utility::Ces {
                        weights,
                        sigma: field(line, "sigma", &a.require("sigma")?)?,
                    },
                    other => return Err(bad(line, "utility", format!("unknown family `{other}`"))),
                };
                a.finish()?;
                let spec = ConsumerSpec {
                    goods: (0..self.goods.len()).map(GoodId).collect(),
                    endowment,
                    utility,
                };
                spec.validate()
                    .map_err(|e| bad(line, "weights", e.to_string()))?;
                self.consumers.push(ConsumerDecl { name, spec });
            }
            "producer" => {
                let output = self.good_id(line, "output", &a.require("output")?)?;
                let input = self.good_id(line, "input", &a.require("input")?)?;
                let spec = ProducerSpec {
                    output,
                    input,
                    a: field(line, "a", &a.require("a")?)?,
                    b: field(line, "b", &a.require("b")?)?,
                };
                a.finish()?;
                if output == input {
                    return Err(bad(line, "input", "input and output must differ"));
                }
                spec.validate().map_err(|e| bad(line, "a", e.to_string()))?;
                self.producers.push(ProducerDecl { name, spec });
            }
            other => return Err(bad(line, "kind", format!("unknown agent kind `{other}`"))),
        }
        Ok(())
    }

    /// The model named in the file, else carriers for a network and
    /// exchange otherwise.
    pub fn default_model(&self) -> ModelChoice {
        self.model.unwrap_or(if self.network.is_some() {
            ModelChoice::Transport(Model::Carriers)
        } else {
            ModelChoice::Exchange
        })
    }

    pub fn transport(&self, model: Model) -> Result<MarketConfig, ScenarioError> {
        let net = self
            .network
            .as_ref()
            .ok_or_else(|| ScenarioError::Economy("scenario has no network".into()))?;
        if self.requirements.is_empty() {
            return Err(ScenarioError::Economy(
                "scenario has no requirements".into(),
            ));
        }
        Ok(build_config(net, &self.requirements, model, &self.build)?)
    }

    /// Market economy of the declared goods and agents, plus the same
    /// economy in the form the centralized solvers take. Without a declared
    /// numéraire the first good is one. Producer profits are split evenly
    /// among consumers.
    pub fn exchange(&self) -> Result<(Economy, ExchangeEconomy), ScenarioError> {
        if self.goods.is_empty() || self.consumers.is_empty() {
            return Err(ScenarioError::Economy(
                "exchange needs goods and consumers".into(),
            ));
        }
        let mut economy = Economy::new();
        let pinned = self.goods.iter().position(|g| g.numeraire).unwrap_or(0);
        for (i, g) in self.goods.iter().enumerate() {
            economy.add_good(if i == pinned {
                Good::numeraire(g.label.clone())
            } else {
                Good::new(g.label.clone())
            });
        }
        let mut consumers = Vec::new();
        for c in &self.consumers {
            let agent = Consumer::new(c.name.clone(), c.spec.clone())
                .map_err(|e| ScenarioError::Economy(format!("{}: {e}", c.name)))?;
            consumers.push(economy.add_agent(Box::new(agent)));
        }
        let share = 1.0 / consumers.len() as f64;
        for p in &self.producers {
            let agent = Producer::new(p.name.clone(), p.spec)
                .map_err(|e| ScenarioError::Economy(format!("{}: {e}", p.name)))?;
            let id = economy.add_agent(Box::new(agent));
            for &c in &consumers {
                economy.profit_shares.push(ProfitShare {
                    producer: id,
                    recipient: c,
                    fraction: share,
                });
            }
        }
        let oracle = ExchangeEconomy {
            goods: self.goods.len(),
            consumers: self.consumers.iter().map(|c| c.spec.clone()).collect(),
            producers: self.producers.iter().map(|p| p.spec).collect(),
        };
        Ok((economy, oracle))
    }

    /// Text that parses back to an equal scenario. Session keys are written
    /// only where they differ from the defaults.
    pub fn emit(&self) -> String {
        let mut out = String::new();
        let join = |v: &[f64]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        if let Some(net) = &self.network {
            out.push_str("[locations]\n");
            let ids: Vec<String> = net.locations().iter().map(|l| l.to_string()).collect();
            writeln!(out, "{}\n", ids.join(" ")).ok();
            out.push_str("[links]\n# from to a b\n");
            for l in net.links() {
                writeln!(out, "{} {} {} {}", l.from, l.to, l.a, l.b).ok();
            }
            out.push_str("\n[requirements]\n# origin destination amount\n");
            for r in &self.requirements {
                writeln!(out, "{} {} {}", r.origin, r.destination, r.amount).ok();
            }
            out.push('\n');
        }
        if !self.goods.is_empty() {
            out.push_str("[goods]\n");
            for g in &self.goods {
                if g.numeraire {
                    writeln!(out, "{} numeraire", g.label).ok();
                } else {
                    writeln!(out, "{}", g.label).ok();
                }
            }
            out.push('\n');
        }
        if !self.consumers.is_empty() || !self.producers.is_empty() {
            out.push_str("[agents]\n");
            for c in &self.consumers {
                let e = join(&c.spec.endowment);
                match &c.spec.utility {
                    Utility::CobbDouglas { weights } => writeln!(
                        out,
                        "consumer name={} utility=cobb-douglas weights={} endowment={e}",
                        c.name,
                        join(weights)
                    ),
                    Utility::Ces { weights, sigma } => writeln!(
                        out,
                        "consumer name={} utility=ces weights={} sigma={sigma} endowment={e}",
                        c.name,
                        join(weights)
                    ),
                }
                .ok();
            }
            for p in &self.producers {
                writeln!(
                    out,
                    "producer name={} output={} input={} a={} b={}",
                    p.name,
                    self.goods[p.spec.output.0].label,
                    self.goods[p.spec.input.0].label,
                    p.spec.a,
                    p.spec.b
                )
                .ok();
            }
            out.push('\n');
        }
        let mut session = Vec::new();
        if let Some(m) = self.model {
            session.push(format!("model = {m}"));
        }
        let (c, d) = (&self.session, SessionConfig::default());
        let (b, bd) = (&self.build, BuildOptions::default());
        let mut put = |key: &str, differs: bool, value: String| {
            if differs {
                session.push(format!("{key} = {value}"));
            }
        };
        put("seed", c.seed != d.seed, c.seed.to_string());
        put(
            "tolerance",
            c.tolerance != d.tolerance,
            c.tolerance.to_string(),
        );
        put(
            "max_cycles",
            c.max_cycles != d.max_cycles,
            c.max_cycles.to_string(),
        );
        put(
            "scheduler",
            c.scheduler != d.scheduler,
            c.scheduler.to_string(),
        );
        put(
            "price_min",
            c.price_min != d.price_min,
            c.price_min.to_string(),
        );
        put(
            "price_max",
            c.price_max != d.price_max,
            c.price_max.to_string(),
        );
        put(
            "price_tolerance",
            c.price_tolerance != d.price_tolerance,
            c.price_tolerance.to_string(),
        );
        put(
            "initial_price",
            c.initial_price != d.initial_price,
            c.initial_price.to_string(),
        );
        put(
            "endowment",
            b.shipper.endowment != bd.shipper.endowment,
            b.shipper.endowment.to_string(),
        );
        put(
            "ramp_width",
            b.shipper.ramp_width != bd.shipper.ramp_width,
            b.shipper.ramp_width.to_string(),
        );
        put(
            "cap_by_holdings",
            b.shipper.cap_by_holdings != bd.shipper.cap_by_holdings,
            b.shipper.cap_by_holdings.to_string(),
        );
        put(
            "bid_price_max",
            b.shipper.price_max != bd.shipper.price_max,
            b.shipper.price_max.to_string(),
        );
        put(
            "arbitrage_step",
            b.arbitrage_step != bd.arbitrage_step,
            b.arbitrage_step.to_string(),
        );
        put(
            "trade_resource",
            b.trade_resource != bd.trade_resource,
            b.trade_resource.to_string(),
        );
        if !session.is_empty() {
            out.push_str("[session]\n");
            for l in session {
                out.push_str(&l);
                out.push('\n');
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_file_is_the_four_location_example() {
        let s = Scenario::four_location();
        let (net, reqs) = Network::four_location();
        let mut links = s.network.as_ref().unwrap().links().to_vec();
        let mut expected = net.links().to_vec();
        let key = |l: &Link| (l.from, l.to);
        links.sort_by_key(key);
        expected.sort_by_key(key);
        assert_eq!(links, expected);
        assert_eq!(s.requirements, reqs);
        assert_eq!(s.default_model(), ModelChoice::Transport(Model::Carriers));
    }

    #[test]
    fn errors_name_the_line() {
        let text = "[locations]\n1 2\n[links]\n1 2 -1 3\n";
        match Scenario::parse(text) {
            Err(ScenarioError::Field { line, field, .. }) => {
                assert_eq!((line, field.as_str()), (4, "a"))
            }
            other => panic!("{other:?}"),
        }
        let text = "[locations]\n1 2\n[links]\n1 1 1 3\n";
        assert!(matches!(
            Scenario::parse(text),
            Err(ScenarioError::Field { line: 4, .. })
        ));
        let text = "[locations]\n1 2\n[links]\n1 2 1\n";
        assert!(matches!(
            Scenario::parse(text),
            Err(ScenarioError::Syntax { line: 4, .. })
        ));
        let text = "[locations]\n1 2 3\n[links]\n1 2 1 0\n[requirements]\n2 3 5\n";
        assert!(matches!(
            Scenario::parse(text),
            Err(ScenarioError::Field { line: 6, .. })
        ));
        assert!(matches!(
            Scenario::parse("[wat]\n"),
            Err(ScenarioError::Syntax { line: 1, .. })
        ));
        let text = "[session]\nseed = x\n";
        assert!(matches!(
            Scenario::parse(text),
            Err(ScenarioError::Field { line: 2, .. })
        ));
    }

    #[test]
    fn exchange_economy_round_trips() {
        let text = "\
[goods]
G_0 numeraire
G_1

[agents]
consumer name=a utility=cobb-douglas weights=0.25,0.75 endowment=2,0
consumer name=b utility=ces weights=0.5,0.5 sigma=2 endowment=0,3
producer name=p output=G_1 input=G_0 a=1 b=0.5

[session]
model = exchange
seed = 3
";
        let s = Scenario::parse(text).unwrap();
        assert_eq!(s.consumers.len(), 2);
        assert_eq!(s.producers[0].spec.output, GoodId(1));
        assert_eq!(Scenario::parse(&s.emit()).unwrap(), s);
        let (economy, oracle) = s.exchange().unwrap();
        assert_eq!(economy.agents.len(), 3);
        assert_eq!(economy.profit_shares.len(), 2);
        assert_eq!(oracle.consumers.len(), 2);
    }

    #[test]
    fn four_location_round_trips() {
        let s = Scenario::four_location();
        assert_eq!(Scenario::parse(&s.emit()).unwrap(), s);
    }
}
