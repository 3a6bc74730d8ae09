//! TTP benchmark instances: the text format, validation, and CEIL_2D distances.
//!
//! Cities and items are 1-based in files and in every external output, and
//! 0-based everywhere inside the crate. City 0 internally is the depot.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// Instances with more cities than this compute distances on demand instead
/// of holding an n×n matrix.
pub const DEFAULT_MATRIX_THRESHOLD: usize = 2000;

const KEY_NAME: &str = "PROBLEM NAME";
const KEY_KNAPSACK_TYPE: &str = "KNAPSACK DATA TYPE";
const KEY_DIMENSION: &str = "DIMENSION";
const KEY_ITEMS: &str = "NUMBER OF ITEMS";
const KEY_CAPACITY: &str = "CAPACITY OF KNAPSACK";
const KEY_MIN_SPEED: &str = "MIN SPEED";
const KEY_MAX_SPEED: &str = "MAX SPEED";
const KEY_RENT: &str = "RENTING RATIO";
const KEY_EDGE_TYPE: &str = "EDGE_WEIGHT_TYPE";

const HEADER_KEYS: [&str; 9] = [
    KEY_NAME,
    KEY_KNAPSACK_TYPE,
    KEY_DIMENSION,
    KEY_ITEMS,
    KEY_CAPACITY,
    KEY_MIN_SPEED,
    KEY_MAX_SPEED,
    KEY_RENT,
    KEY_EDGE_TYPE,
];

const COORD_SECTION: &str = "NODE_COORD_SECTION";
const ITEMS_SECTION: &str = "ITEMS SECTION";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Item {
    pub profit: u64,
    pub weight: u64,
    /// 0-based city index; never 0.
    pub node: usize,
}

/// Raw instance contents, exactly as read from (or written to) a file.
///
/// This type carries no guarantees; [`Instance::new`] validates it.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceData {
    pub name: String,
    pub knapsack_type: String,
    pub coords: Vec<(f64, f64)>,
    pub items: Vec<Item>,
    pub capacity: u64,
    pub min_speed: f64,
    pub max_speed: f64,
    pub renting_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NoCities,
    ItemAtDepot { item: usize },
    ItemNodeOutOfRange { item: usize, node: usize },
    ZeroProfit { item: usize },
    ZeroWeight { item: usize },
    SpeedRangeDegenerate,
    NonPositiveMinSpeed,
    NegativeRent,
    NonFiniteCoordinate { city: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // item and city numbers are reported 1-based
        match self {
            Violation::NoCities => write!(f, "instance has no cities"),
            Violation::ItemAtDepot { item } => write!(f, "item at depot (item {})", item + 1),
            Violation::ItemNodeOutOfRange { item, node } => {
                write!(f, "item {} assigned to unknown city {}", item + 1, node + 1)
            }
            Violation::ZeroProfit { item } => write!(f, "item {} has zero profit", item + 1),
            Violation::ZeroWeight { item } => write!(f, "item {} has zero weight", item + 1),
            Violation::SpeedRangeDegenerate => write!(f, "speed range degenerate (need max > min)"),
            Violation::NonPositiveMinSpeed => write!(f, "minimum speed must be positive"),
            Violation::NegativeRent => write!(f, "renting ratio must be non-negative"),
            Violation::NonFiniteCoordinate { city } => {
                write!(f, "city {} has a non-finite coordinate", city + 1)
            }
        }
    }
}

/// Lists every broken instance invariant. An empty list means the data is valid.
pub fn validate(data: &InstanceData) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = data.coords.len();
    if n == 0 {
        out.push(Violation::NoCities);
    }
    for (city, &(x, y)) in data.coords.iter().enumerate() {
        if !x.is_finite() || !y.is_finite() {
            out.push(Violation::NonFiniteCoordinate { city });
        }
    }
    for (k, item) in data.items.iter().enumerate() {
        if item.node == 0 {
            out.push(Violation::ItemAtDepot { item: k });
        } else if item.node >= n {
            out.push(Violation::ItemNodeOutOfRange {
                item: k,
                node: item.node,
            });
        }
        if item.profit == 0 {
            out.push(Violation::ZeroProfit { item: k });
        }
        if item.weight == 0 {
            out.push(Violation::ZeroWeight { item: k });
        }
    }
    if !(data.min_speed > 0.0) {
        out.push(Violation::NonPositiveMinSpeed);
    }
    if !(data.max_speed > data.min_speed) {
        out.push(Violation::SpeedRangeDegenerate);
    }
    if !(data.renting_ratio >= 0.0) {
        out.push(Violation::NegativeRent);
    }
    out
}

#[derive(Debug, Clone)]
enum Distances {
    Matrix { n: usize, table: Vec<u32> },
    OnDemand,
}

/// A validated, immutable TTP instance.
#[derive(Debug, Clone)]
pub struct Instance {
    data: InstanceData,
    nu: f64,
    distances: Distances,
    items_by_city: Vec<Vec<usize>>,
}

impl Instance {
    pub fn new(data: InstanceData) -> Result<Self> {
        Self::with_matrix_threshold(data, DEFAULT_MATRIX_THRESHOLD)
    }

    /// Like [`Instance::new`], precomputing the distance matrix only when the
    /// city count is at most `threshold`.
    pub fn with_matrix_threshold(data: InstanceData, threshold: usize) -> Result<Self> {
        let violations = validate(&data);
        if !violations.is_empty() {
            return Err(Error::InvalidInstance(violations));
        }
        let n = data.coords.len();
        // C = 0 gives an infinite slope; `velocity` special-cases the empty knapsack.
        let nu = (data.max_speed - data.min_speed) / data.capacity as f64;
        let distances = if n <= threshold {
            let mut table = vec![0u32; n * n];
            for i in 0..n {
                for j in (i + 1)..n {
                    let d = ceil_2d(data.coords[i], data.coords[j]) as u32;
                    table[i * n + j] = d;
                    table[j * n + i] = d;
                }
            }
            Distances::Matrix { n, table }
        } else {
            Distances::OnDemand
        };
        let mut items_by_city = vec![Vec::new(); n];
        for (k, item) in data.items.iter().enumerate() {
            items_by_city[item.node].push(k);
        }
        Ok(Instance {
            data,
            nu,
            distances,
            items_by_city,
        })
    }

    pub fn data(&self) -> &InstanceData {
        &self.data
    }

    pub fn into_data(self) -> InstanceData {
        self.data
    }

    pub fn name(&self) -> &str {
        &self.data.name
    }

    pub fn num_cities(&self) -> usize {
        self.data.coords.len()
    }

    pub fn num_items(&self) -> usize {
        self.data.items.len()
    }

    pub fn items(&self) -> &[Item] {
        &self.data.items
    }

    pub fn capacity(&self) -> u64 {
        self.data.capacity
    }

    pub fn min_speed(&self) -> f64 {
        self.data.min_speed
    }

    pub fn max_speed(&self) -> f64 {
        self.data.max_speed
    }

    pub fn renting_ratio(&self) -> f64 {
        self.data.renting_ratio
    }

    /// Speed loss per unit of carried weight, `(vmax - vmin) / C`.
    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// 0-based indices of the items stored at a 0-based city, in file order.
    pub fn items_at(&self, city: usize) -> &[usize] {
        &self.items_by_city[city]
    }

    /// Travel speed while carrying `weight`.
    pub fn velocity(&self, weight: u64) -> f64 {
        if weight == 0 {
            self.data.max_speed
        } else {
            self.data.max_speed - self.nu * weight as f64
        }
    }

    /// CEIL_2D distance between two 0-based cities.
    #[inline]
    pub fn dist(&self, a: usize, b: usize) -> u64 {
        match &self.distances {
            Distances::Matrix { n, table } => u64::from(table[a * n + b]),
            Distances::OnDemand => {
                if a == b {
                    0
                } else {
                    ceil_2d(self.data.coords[a], self.data.coords[b])
                }
            }
        }
    }

    /// CEIL_2D distance between two 1-based cities.
    pub fn distance(&self, i: usize, j: usize) -> Result<u64> {
        let n = self.num_cities();
        for city in [i, j] {
            if city == 0 || city > n {
                return Err(Error::CityOutOfRange { city, n });
            }
        }
        Ok(self.dist(i - 1, j - 1))
    }

    pub fn holds_matrix(&self) -> bool {
        matches!(self.distances, Distances::Matrix { .. })
    }

    pub fn validate(&self) -> Vec<Violation> {
        validate(&self.data)
    }
}

fn ceil_2d(a: (f64, f64), b: (f64, f64)) -> u64 {
    let dx = a.0 - b.0;
    let dy = a.1 - b.1;
    (dx * dx + dy * dy).sqrt().ceil() as u64
}

/// Parses the TTP benchmark text format and validates the result.
pub fn parse_instance(text: &str) -> Result<Instance> {
    Instance::new(parse_instance_data(text)?)
}

/// Parses the TTP benchmark text format without validating instance invariants.
///
/// Structural problems (headers, section sizes, depot items, non-integer
/// weights) are still reported here.
pub fn parse_instance_data(text: &str) -> Result<InstanceData> {
    let mut headers: HashMap<&'static str, (usize, String)> = HashMap::new();
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));

    let mut coord_header_seen = false;
    for (lineno, line) in lines.by_ref() {
        if line.is_empty() {
            continue;
        }
        if line.starts_with(COORD_SECTION) {
            coord_header_seen = true;
            break;
        }
        let (key, value) = line.split_once(':').ok_or_else(|| Error::Syntax {
            line: lineno,
            message: format!("expected `KEY: value`, got `{line}`"),
        })?;
        let key = key.trim();
        let known = HEADER_KEYS
            .iter()
            .copied()
            .find(|k| *k == key)
            .ok_or_else(|| Error::Syntax {
                line: lineno,
                message: format!("unknown header key `{key}`"),
            })?;
        if headers
            .insert(known, (lineno, value.trim().to_string()))
            .is_some()
        {
            return Err(Error::DuplicateHeader(known.to_string()));
        }
    }
    for key in HEADER_KEYS {
        if !headers.contains_key(key) {
            return Err(Error::MissingHeader(key));
        }
    }
    if !coord_header_seen {
        return Err(Error::MissingHeader(COORD_SECTION));
    }

    let edge_type = &headers[KEY_EDGE_TYPE].1;
    if edge_type != "CEIL_2D" {
        return Err(Error::UnsupportedEdgeWeightType(edge_type.clone()));
    }
    let n: usize = header_value(&headers, KEY_DIMENSION)?;
    let m: usize = header_value(&headers, KEY_ITEMS)?;
    let capacity: u64 = header_value(&headers, KEY_CAPACITY)?;
    let min_speed: f64 = header_value(&headers, KEY_MIN_SPEED)?;
    let max_speed: f64 = header_value(&headers, KEY_MAX_SPEED)?;
    let renting_ratio: f64 = header_value(&headers, KEY_RENT)?;

    let mut coords = Vec::with_capacity(n);
    let mut items_header_seen = false;
    for (lineno, line) in lines.by_ref() {
        if line.is_empty() {
            continue;
        }
        if line.starts_with(ITEMS_SECTION) {
            items_header_seen = true;
            break;
        }
        let fields = split_fields::<3>(line, lineno)?;
        let index: usize = parse_field(fields[0], lineno, "city index")?;
        if index != coords.len() + 1 {
            return Err(Error::Syntax {
                line: lineno,
                message: format!("expected city index {}, got {index}", coords.len() + 1),
            });
        }
        let x: f64 = parse_field(fields[1], lineno, "x coordinate")?;
        let y: f64 = parse_field(fields[2], lineno, "y coordinate")?;
        coords.push((x, y));
    }
    if coords.len() != n {
        return Err(Error::DimensionMismatch {
            section: COORD_SECTION,
            declared: n,
            found: coords.len(),
        });
    }
    if !items_header_seen {
        return Err(Error::MissingHeader(ITEMS_SECTION));
    }

    let mut items = Vec::with_capacity(m);
    for (lineno, line) in lines {
        if line.is_empty() {
            continue;
        }
        let fields = split_fields::<4>(line, lineno)?;
        let index: usize = parse_field(fields[0], lineno, "item index")?;
        if index != items.len() + 1 {
            return Err(Error::Syntax {
                line: lineno,
                message: format!("expected item index {}, got {index}", items.len() + 1),
            });
        }
        let profit: u64 = parse_integer(fields[1], lineno, "profit")?;
        let weight: u64 = parse_integer(fields[2], lineno, "weight")?;
        let node: usize = parse_field(fields[3], lineno, "assigned node")?;
        if node == 1 {
            return Err(Error::ItemAtDepot { item: index });
        }
        if node == 0 || node > n {
            return Err(Error::CityOutOfRange { city: node, n });
        }
        items.push(Item {
            profit,
            weight,
            node: node - 1,
        });
    }
    if items.len() != m {
        return Err(Error::DimensionMismatch {
            section: ITEMS_SECTION,
            declared: m,
            found: items.len(),
        });
    }

    Ok(InstanceData {
        name: headers[KEY_NAME].1.clone(),
        knapsack_type: headers[KEY_KNAPSACK_TYPE].1.clone(),
        coords,
        items,
        capacity,
        min_speed,
        max_speed,
        renting_ratio,
    })
}

fn header_value<T: std::str::FromStr>(
    headers: &HashMap<&'static str, (usize, String)>,
    key: &'static str,
) -> Result<T> {
    let (line, value) = &headers[key];
    value.parse().map_err(|_| Error::Syntax {
        line: *line,
        message: format!("cannot parse `{key}` value `{value}`"),
    })
}

fn split_fields<const N: usize>(line: &str, lineno: usize) -> Result<[&str; N]> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    fields.try_into().map_err(|v: Vec<&str>| Error::Syntax {
        line: lineno,
        message: format!("expected {N} fields, got {}", v.len()),
    })
}

fn parse_field<T: std::str::FromStr>(s: &str, line: usize, what: &str) -> Result<T> {
    s.parse().map_err(|_| Error::Syntax {
        line,
        message: format!("cannot parse {what} `{s}`"),
    })
}

fn parse_integer(s: &str, line: usize, what: &str) -> Result<u64> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let message = match s.parse::<f64>() {
        Ok(_) => format!("non-integer {what} `{s}`"),
        Err(_) => format!("cannot parse {what} `{s}`"),
    };
    Err(Error::Syntax { line, message })
}

/// Writes instance data in the benchmark layout accepted by [`parse_instance`].
pub fn write_instance(data: &InstanceData) -> String {
    use std::fmt::Write;

    let mut s = String::new();
    let _ = writeln!(s, "{KEY_NAME}: \t{}", data.name);
    let _ = writeln!(s, "{KEY_KNAPSACK_TYPE}: \t{}", data.knapsack_type);
    let _ = writeln!(s, "{KEY_DIMENSION}:\t{}", data.coords.len());
    let _ = writeln!(s, "{KEY_ITEMS}: \t{}", data.items.len());
    let _ = writeln!(s, "{KEY_CAPACITY}: \t{}", data.capacity);
    let _ = writeln!(s, "{KEY_MIN_SPEED}: \t{}", data.min_speed);
    let _ = writeln!(s, "{KEY_MAX_SPEED}: \t{}", data.max_speed);
    let _ = writeln!(s, "{KEY_RENT}: \t{}", data.renting_ratio);
    let _ = writeln!(s, "{KEY_EDGE_TYPE}:\tCEIL_2D");
    let _ = writeln!(s, "{COORD_SECTION}\t(INDEX, X, Y): ");
    for (i, (x, y)) in data.coords.iter().enumerate() {
        let _ = writeln!(s, "{}\t{}\t{}", i + 1, x, y);
    }
    let _ = writeln!(s, "{ITEMS_SECTION}\t(INDEX, PROFIT, WEIGHT, ASSIGNED NODE NUMBER): ");
    for (k, item) in data.items.iter().enumerate() {
        let _ = writeln!(
            s,
            "{}\t{}\t{}\t{}",
            k + 1,
            item.profit,
            item.weight,
            item.node + 1
        );
    }
    s
}
