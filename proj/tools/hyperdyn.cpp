#include "hyperdyn/cli.hpp"

int main(int argc, char** argv) {
    try {
        return hyperdyn::cli::main_entry(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return hyperdyn::cli::usage_error;
    }
}
