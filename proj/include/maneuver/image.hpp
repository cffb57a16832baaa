#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace maneuver {

// Row-major, 8-bit.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> pixels;
};

// Row-major, 8-bit, 3 bytes per pixel (RGB).
struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> pixels;

    void fill(uint8_t r, uint8_t g, uint8_t b);
    void set(int x, int y, uint8_t r, uint8_t g, uint8_t b);
};

// Reads a P5 PGM or an 8-bit PNG (grayscale or RGB; RGB averages to gray).
// Throws MapLoadError on anything unreadable.
GrayImage load_image(const std::string& path);

void save_pgm(const std::string& path, const GrayImage& img);
void save_png(const std::string& path, const GrayImage& img);
void save_png(const std::string& path, const RgbImage& img);

}  // namespace maneuver
