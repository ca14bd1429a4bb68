//! Boundary value test cases around DSS = 0 for the relative and absolute
//! forms, printed as a parameter table.

use dss_bva::bva::{derive_suite, DerivationConfig, Form};

fn main() -> dss_bva::Result<()> {
    for form in [Form::Relative, Form::Absolute] {
        let config = DerivationConfig {
            form,
            ..DerivationConfig::default()
        };
        let suite = derive_suite(&config)?;
        println!(
            "{form:?} form: {} cases ({} SC)",
            suite.cases.len(),
            suite.sc_count()
        );
        print!("{}", suite.to_table_csv()?);
        for c in &suite.cases {
            println!(
                "  {} {:<8} offset {:+.6} {}",
                c.id,
                c.axis.symbol(),
                c.offset,
                c.axis.unit()
            );
        }
        println!();
    }
    Ok(())
}
