//! Holds only the `acceptance` test target. It lives in its own package so
//! that it runs after the unit and integration suites of the other crates.
