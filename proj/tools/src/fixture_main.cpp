#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "agricurate/error.hpp"
#include "fixture.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Write the synthetic end-to-end fixture", "agricurate-fixture"};
    std::string out;
    agricurate::fixture::FixtureSpec spec;
    app.add_option("out", out, "Output directory")->required();
    app.add_option("--seed", spec.seed)->capture_default_str();
    app.add_option("--per-collection", spec.per_collection)->capture_default_str();
    app.add_option("--width", spec.width)->capture_default_str();
    app.add_option("--height", spec.height)->capture_default_str();
    CLI11_PARSE(app, argc, argv);
    try {
        const auto s = agricurate::fixture::write_fixture(out, spec);
        std::cout << s.images << " images (" << s.clean() << " clean, " << s.duplicates << " duplicates, "
                  << s.blurry << " blurry, " << s.dark << " dark)\n";
    } catch (const agricurate::Error& e) {
        std::cerr << e.kind() << ": " << e.what() << '\n';
        return 1;
    }
    return 0;
}
