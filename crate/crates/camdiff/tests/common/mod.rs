#![allow(dead_code)]

pub mod fixture;
#[path = "../../../core/tests/common/oracle.rs"]
pub mod oracle;
pub mod stub;
