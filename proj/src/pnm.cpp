#include "semsteg/pnm.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <vector>

#include "semsteg/errors.hpp"

namespace semsteg {

namespace {

// Reads the next header token, skipping whitespace and '#' comments; tracks
// the byte offset for error messages.
std::string next_token(std::istream& in, std::size_t& offset) {
    std::string tok;
    int ch;
    while ((ch = in.get()) != EOF) {
        ++offset;
        if (ch == '#') {
            while ((ch = in.get()) != EOF) {
                ++offset;
                if (ch == '\n') break;
            }
            continue;
        }
        if (std::isspace(ch)) {
            if (!tok.empty()) return tok;
            continue;
        }
        tok.push_back(static_cast<char>(ch));
    }
    if (tok.empty()) throw FormatError("unexpected end of header at byte " + std::to_string(offset));
    return tok;
}

int parse_int(const std::string& tok, std::size_t offset, const char* what) {
    for (char c : tok)
        if (!std::isdigit(static_cast<unsigned char>(c)))
            throw FormatError(std::string("malformed ") + what + " near byte " +
                              std::to_string(offset));
    return std::stoi(tok);
}

}  // namespace

Tensor load_pnm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open '" + path + "'");
    std::size_t offset = 0;
    std::string magic = next_token(in, offset);
    int channels;
    if (magic == "P5")
        channels = 1;
    else if (magic == "P6")
        channels = 3;
    else
        throw FormatError("unsupported magic '" + magic + "' at byte 0 (want P5 or P6)");
    int w = parse_int(next_token(in, offset), offset, "width");
    int h = parse_int(next_token(in, offset), offset, "height");
    int maxval = parse_int(next_token(in, offset), offset, "maxval");
    if (w <= 0 || h <= 0) throw FormatError("non-positive dimensions near byte " + std::to_string(offset));
    if (maxval != 255)
        throw FormatError("unsupported maxval " + std::to_string(maxval) + " near byte " +
                          std::to_string(offset) + " (only 255)");

    std::size_t npix = static_cast<std::size_t>(w) * h * channels;
    std::vector<unsigned char> raw(npix);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(npix));
    if (static_cast<std::size_t>(in.gcount()) != npix)
        throw FormatError("truncated payload at byte " +
                          std::to_string(offset + static_cast<std::size_t>(in.gcount())) +
                          " (expected " + std::to_string(npix) + " pixel bytes)");

    // interleaved file order -> planar (C,H,W)
    Tensor img = Tensor::zeros({channels, h, w});
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < channels; ++c)
                img.data[(static_cast<std::size_t>(c) * h + y) * w + x] =
                    raw[(static_cast<std::size_t>(y) * w + x) * channels + c] / 255.0;
    return img;
}

void save_pnm(const Tensor& image, const std::string& path) {
    if (image.shape.size() != 3) throw ShapeError("save_pnm expects (C,H,W)");
    int C = image.shape[0], H = image.shape[1], W = image.shape[2];
    if (C != 1 && C != 3) throw ShapeError("save_pnm: channels must be 1 (P5) or 3 (P6)");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write '" + path + "'");
    out << (C == 1 ? "P5" : "P6") << "\n" << W << " " << H << "\n255\n";
    std::vector<unsigned char> raw(static_cast<std::size_t>(C) * H * W);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x)
            for (int c = 0; c < C; ++c) {
                double v = std::round(image.data[(static_cast<std::size_t>(c) * H + y) * W + x] * 255.0);
                v = std::min(255.0, std::max(0.0, v));
                raw[(static_cast<std::size_t>(y) * W + x) * C + c] = static_cast<unsigned char>(v);
            }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) throw FormatError("short write to '" + path + "'");
}

}  // namespace semsteg
