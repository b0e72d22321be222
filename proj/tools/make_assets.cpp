// Writes the built-in test scenes as PGM files: spi_assets [output_dir]

#include <exception>
#include <filesystem>
#include <iostream>

#include "spi/assets.hpp"
#include "spi/io.hpp"

int main(int argc, char** argv) {
  const std::filesystem::path dir = argc > 1 ? argv[1] : "assets";
  try {
    spi::write_pgm(dir / "glyph64.pgm", spi::assets::glyph64());
    spi::write_pgm(dir / "composite64.pgm", spi::assets::composite64());
  } catch (const std::exception& e) {
    std::cerr << "spi_assets: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
