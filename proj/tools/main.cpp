#include "hcd/cli.hpp"

int main(int argc, char** argv) {
    return hcd::parse_and_dispatch(argc, argv);
}
