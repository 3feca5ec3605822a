// Writes a synthetic catalog with a planted coupled-earthquake rule to stdout.
#include <iostream>

#include "CLI11.hpp"
#include "quakefis/synthetic.hpp"

int main(int argc, char** argv) {
    quakefis::SyntheticCatalogConfig cfg;
    CLI::App app{"Generate a synthetic regional catalog (CSV on stdout)"};
    app.add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
    app.add_option("--years", cfg.years, "Catalog length in years")->capture_default_str();
    app.add_option("--rate", cfg.background_rate_per_year, "Background events per year")
        ->capture_default_str();
    app.add_option("--follow-probability", cfg.follow_probability,
                   "Chance that a couple is followed by a strong event")
        ->capture_default_str();
    CLI11_PARSE(app, argc, argv);
    std::cout << quakefis::catalog_to_csv(quakefis::generate_synthetic_catalog(cfg));
    return 0;
}
