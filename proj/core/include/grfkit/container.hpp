#pragma once

#include <filesystem>

#include "grfkit/types.hpp"

namespace grfkit {

// Portable on-disk take container: a directory holding `meta.json` plus one
// raw blob per array. Blobs are little-endian IEEE-754 float32 (`.f32`) or
// unsigned 8-bit (`.u8`), row-major, no padding. meta.json is self-describing
// (shapes, rates, units, skeleton, layout, subject), so a take can be loaded
// with no out-of-band knowledge. Round-trips are bit-exact.
//
// Filenames: poses.f32 [T,J,3] m; local_rotations.f32 [T,J,4];
// root_translation.f32 [T,3] m; pressure.f32 [T,2,16] N/cm^2;
// vgrf.f32 [T,2,16] BW; contacts.u8 [T,2,2]; imu_accel.f32 [T,2,3] m/s^2.

void save_take(const Take& take, const std::filesystem::path& dir);

Take load_take(const std::filesystem::path& dir);

// Raw blob helpers (also used by the CLI for standalone .f32 outputs).
void write_f32(const std::filesystem::path& file, const std::vector<float>& data);
std::vector<float> read_f32(const std::filesystem::path& file);

// Importer hook for the released database's native files. Not implemented in
// this build; converts should produce the container format above.
Take import_native_take(const std::filesystem::path& dir);

}  // namespace grfkit
