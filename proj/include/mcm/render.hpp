#pragma once

// Images, palettes and flag parsing for the command-line tool.

#include "classify.hpp"
#include "dynamics.hpp"
#include "parallel.hpp"

#include <array>
#include <cstdint>
#include <fstream>
#include <regex>
#include <string>
#include <vector>

namespace mcm {

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct Image {
    int width = 0, height = 0;
    std::vector<Rgb> pixels;

    Image() = default;
    Image(int w, int h, Rgb fill = {}) : width(w), height(h), pixels(std::size_t(w) * h, fill) {}
    Rgb& at(int i, int j) { return pixels[std::size_t(j) * width + i]; }
    const Rgb& at(int i, int j) const { return pixels[std::size_t(j) * width + i]; }
};

inline std::string ppm_bytes(const Image& im) {
    std::string out = "P6\n" + std::to_string(im.width) + " " + std::to_string(im.height) + "\n255\n";
    out.reserve(out.size() + im.pixels.size() * 3);
    for (const Rgb& p : im.pixels) {
        out.push_back(char(p.r));
        out.push_back(char(p.g));
        out.push_back(char(p.b));
    }
    return out;
}

inline void write_ppm(const std::string& path, const Image& im) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    auto bytes = ppm_bytes(im);
    f.write(bytes.data(), std::streamsize(bytes.size()));
    if (!f) throw std::runtime_error("write failed: " + path);
}

/// Cyclic escape-time palette; non-escaping pixels are black.
inline Rgb escape_color(int k) {
    if (k < 0) return {0, 0, 0};
    double t = std::fmod(k * 0.08, 1.0);
    auto ch = [&](double phase) { return std::uint8_t(127.5 + 127.5 * std::cos(2 * kPi * (t + phase))); };
    return {ch(0.0), ch(1.0 / 3), ch(2.0 / 3)};
}

/// Fixed class palette.
inline Rgb class_color(EscapeTag t) {
    switch (t) {
        case EscapeTag::CantorSet: return {235, 235, 235};
        case EscapeTag::CantorCircles: return {40, 90, 200};
        case EscapeTag::Sierpinski: return {235, 150, 40};
        case EscapeTag::Connected: return {20, 20, 20};
        default: return {200, 30, 30};
    }
}

/// Piece colors: a hash of the label; escaped pixels white, graph pixels black.
inline Rgb label_color(int label) {
    if (label == -1) return {255, 255, 255};
    if (label < 0) return {0, 0, 0};
    std::uint32_t h = std::uint32_t(label) * 2654435761u;
    return {std::uint8_t(64 + h % 192), std::uint8_t(64 + (h >> 8) % 192), std::uint8_t(64 + (h >> 16) % 192)};
}

inline Image render_dynamical(const ParamContext& c, const Window& win, int w, int h, int budget = 256, int jobs = 1) {
    if (w < 16 || h < 16) throw std::invalid_argument("resolution must be at least 16x16");
    Image im(w, h);
    parallel_for(std::size_t(h), resolve_jobs(jobs), [&](std::size_t j) {
        for (int i = 0; i < w; ++i) im.at(i, int(j)) = escape_color(escape_time(c, win.at(i, int(j), w, h), budget));
    });
    return im;
}

inline Image render_classes(const SurveyResult& s) {
    Image im(s.width, s.height);
    for (int j = 0; j < s.height; ++j)
        for (int i = 0; i < s.width; ++i) im.at(i, j) = class_color(s.at(i, j));
    return im;
}

/// Draws a polyline in window coordinates (segments longer than the window are skipped).
inline void draw_polyline(Image& im, const Window& win, const std::vector<cplx>& pts, Rgb color, bool closed = false) {
    auto px = [&](cplx z) {
        return std::pair<double, double>{(z.real() - win.x0) / (win.x1 - win.x0) * im.width - 0.5,
                                         (win.y1 - z.imag()) / (win.y1 - win.y0) * im.height - 0.5};
    };
    auto plot = [&](int i, int j) {
        if (i >= 0 && j >= 0 && i < im.width && j < im.height) im.at(i, j) = color;
    };
    std::size_t count = closed ? pts.size() : (pts.empty() ? 0 : pts.size() - 1);
    for (std::size_t k = 0; k < count; ++k) {
        auto [x0, y0] = px(pts[k]);
        auto [x1, y1] = px(pts[(k + 1) % pts.size()]);
        if (!std::isfinite(x0) || !std::isfinite(x1) || !std::isfinite(y0) || !std::isfinite(y1)) continue;
        double len = std::max(std::abs(x1 - x0), std::abs(y1 - y0));
        if (len > 4.0 * (im.width + im.height)) continue;
        int steps = std::max(1, int(std::ceil(len)));
        for (int s = 0; s <= steps; ++s) {
            double t = double(s) / steps;
            plot(int(std::lround(x0 + t * (x1 - x0))), int(std::lround(y0 + t * (y1 - y0))));
        }
    }
}

/// Parses "a+bi", "a-bi", "bi", "a" and polar "r@deg".
inline cplx parse_complex(const std::string& text) {
    std::string s;
    for (char ch : text)
        if (!std::isspace(static_cast<unsigned char>(ch))) s.push_back(ch);
    if (s.empty()) throw std::invalid_argument("empty complex number");
    auto num = [&](const std::string& x) {
        std::size_t used = 0;
        double v = std::stod(x, &used);
        if (used != x.size()) throw std::invalid_argument("bad number '" + x + "'");
        return v;
    };
    try {
        if (auto at = s.find('@'); at != std::string::npos) {
            double r = num(s.substr(0, at)), deg = num(s.substr(at + 1));
            // exact values on the axes
            double a = std::fmod(deg, 360.0);
            if (a < 0) a += 360;
            if (a == 0) return {r, 0};
            if (a == 90) return {0, r};
            if (a == 180) return {-r, 0};
            if (a == 270) return {0, -r};
            return std::polar(r, deg * kPi / 180);
        }
        if (s.back() != 'i') return {num(s), 0};
        std::string body = s.substr(0, s.size() - 1);
        // split at the last sign that is not part of an exponent
        std::size_t split = std::string::npos;
        for (std::size_t k = body.size(); k-- > 1;)
            if ((body[k] == '+' || body[k] == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') { split = k; break; }
        auto imag = [&](const std::string& x) {
            if (x.empty() || x == "+") return 1.0;
            if (x == "-") return -1.0;
            return num(x);
        };
        if (split == std::string::npos) return {0, imag(body)};
        return {num(body.substr(0, split)), imag(body.substr(split))};
    } catch (const std::invalid_argument&) {
        throw std::invalid_argument("bad complex number '" + text + "'");
    } catch (const std::out_of_range&) {
        throw std::invalid_argument("complex number out of range '" + text + "'");
    }
}

/// "x0,x1,y0,y1" with x0 < x1 and y0 < y1.
inline Window parse_window(const std::string& text) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        std::size_t used = 0;
        double x = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument("bad window '" + text + "'");
        v.push_back(x);
    }
    if (v.size() != 4 || !(v[0] < v[1]) || !(v[2] < v[3])) throw std::invalid_argument("bad window '" + text + "'");
    return {v[0], v[1], v[2], v[3]};
}

}  // namespace mcm
