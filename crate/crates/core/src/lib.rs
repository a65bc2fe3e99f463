//! Exact, desk-scale simulation of the combinatorics behind tower-killing
//! forcings: ultimately periodic subsets of ω, the Cantor–Lebesgue map,
//! reasonable posets of finite partial isomorphisms, containment
//! certificates, Medini-style bit-fixing conditions and maximal-interval
//! assembly.

pub mod cantor;
pub mod decomp;
pub mod error;
pub mod exactnum;
pub mod mainlemma;
pub mod medini;
pub mod oracle;
pub mod poset;
pub mod report;
pub mod scenario;
pub mod setalg;
pub mod suite;

pub use cantor::{lambda_value, GoodInterval};
pub use error::{Error, Result};
pub use exactnum::{Int, Interval, Nat, Rational};
pub use mainlemma::{Caps, ContainmentCertificate};
pub use medini::{Coloring, MediniCondition};
pub use poset::{AId, BId, Condition, PointRegistry, Schedule, Task, Universe};
pub use setalg::{Bits, CardinalityClass, Tower, UPSet};
