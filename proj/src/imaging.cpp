#include "sceneret/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <string>

#include <jpeglib.h>
#include <png.h>

#include "sceneret/error.hpp"
#include "sceneret/io_util.hpp"

namespace sceneret {

bool CellBounds::contains(double x, double y) const {
    const double fx = std::floor(x);
    const double fy = std::floor(y);
    return fx >= x0 && fx < x1 && fy >= y0 && fy < y1;
}

Image make_image(int width, int height, int channels, double fill) {
    if (width < 1 || height < 1) throw Error("image dimensions must be positive");
    if (channels != 1 && channels != 3) throw Error("images have 1 or 3 channels");
    Image img;
    img.width = width;
    img.height = height;
    img.planes.assign(static_cast<std::size_t>(channels), Plane::Constant(height, width, fill));
    return img;
}

namespace {

Image from_interleaved(const unsigned char* data, int width, int height, int channels) {
    Image img = make_image(width, height, channels);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            for (int c = 0; c < channels; ++c)
                img.planes[static_cast<std::size_t>(c)](y, x) =
                    data[(static_cast<std::size_t>(y) * width + x) * channels + c] / 255.0;
    return img;
}

Image decode_png(std::span<const unsigned char> bytes) {
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()))
        throw Error(std::string("png decode error: ") + image.message);
    const bool colour = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
    image.format = colour ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    std::vector<unsigned char> buffer(PNG_IMAGE_SIZE(image));
    png_color white{255, 255, 255};
    if (!png_image_finish_read(&image, &white, buffer.data(), 0, nullptr)) {
        std::string msg = image.message;
        png_image_free(&image);
        throw Error("png decode error: " + msg);
    }
    const int w = static_cast<int>(image.width);
    const int h = static_cast<int>(image.height);
    png_image_free(&image);
    return from_interleaved(buffer.data(), w, h, colour ? 3 : 1);
}

struct JpegErrorManager {
    jpeg_error_mgr base;
    std::jmp_buf jump;
    char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
    auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
    (*cinfo->err->format_message)(cinfo, err->message);
    std::longjmp(err->jump, 1);
}

void jpeg_silent(j_common_ptr, int) {}

Image decode_jpeg(std::span<const unsigned char> bytes) {
    jpeg_decompress_struct cinfo;
    JpegErrorManager err;
    cinfo.err = jpeg_std_error(&err.base);
    err.base.error_exit = jpeg_error_exit;
    err.base.emit_message = jpeg_silent;
    err.message[0] = '\0';

    // Everything touched after setjmp lives outside this frame's locals.
    std::vector<unsigned char> pixels;
    int width = 0, height = 0, channels = 0;
    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&cinfo);
        throw Error(std::string("jpeg decode error: ") + err.message);
    }
    jpeg_create_decompress(&cinfo);
    jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = cinfo.num_components == 1 ? JCS_GRAYSCALE : JCS_RGB;
    jpeg_start_decompress(&cinfo);
    width = static_cast<int>(cinfo.output_width);
    height = static_cast<int>(cinfo.output_height);
    channels = cinfo.output_components;
    pixels.resize(static_cast<std::size_t>(width) * height * channels);
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = pixels.data() + static_cast<std::size_t>(cinfo.output_scanline) * width * channels;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    const long warnings = err.base.num_warnings;
    jpeg_destroy_decompress(&cinfo);
    // libjpeg pads a truncated stream with grey and only warns.
    if (warnings > 0) throw Error("jpeg decode error: truncated or corrupt stream");
    return from_interleaved(pixels.data(), width, height, channels);
}

}  // namespace

Image decode_image(std::span<const unsigned char> bytes) {
    static constexpr unsigned char png_sig[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
    if (bytes.size() >= 8 && std::equal(png_sig, png_sig + 8, bytes.begin())) return decode_png(bytes);
    if (bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF) return decode_jpeg(bytes);
    throw Error("unsupported image format");
}

Image read_image(const std::filesystem::path& path) {
    const std::vector<char> data = io::read_file(path);
    try {
        return decode_image({reinterpret_cast<const unsigned char*>(data.data()), data.size()});
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

void write_png(const Image& img, const std::filesystem::path& path) {
    const int ch = img.channels();
    if (ch != 1 && ch != 3) throw Error("write_png: images have 1 or 3 channels");
    std::vector<unsigned char> buffer(static_cast<std::size_t>(img.width) * img.height * ch);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < ch; ++c) {
                const double v = std::clamp(img.planes[static_cast<std::size_t>(c)](y, x), 0.0, 1.0);
                buffer[(static_cast<std::size_t>(y) * img.width + x) * ch + c] =
                    static_cast<unsigned char>(std::lround(v * 255.0));
            }
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width);
    image.height = static_cast<png_uint_32>(img.height);
    image.format = ch == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&image, nullptr, &size, 0, buffer.data(), 0, nullptr))
        throw Error(std::string("png encode error: ") + image.message);
    std::vector<char> out(size);
    if (!png_image_write_to_memory(&image, out.data(), &size, 0, buffer.data(), 0, nullptr))
        throw Error(std::string("png encode error: ") + image.message);
    out.resize(size);
    io::write_file_atomic(path, std::span<const char>(out));
}

HsvImage to_hsv(const Image& img) {
    if (img.channels() != 3) throw Error("to_hsv requires a 3-channel image");
    HsvImage out;
    out.width = img.width;
    out.height = img.height;
    out.hue.resize(img.height, img.width);
    out.saturation.resize(img.height, img.width);
    out.value.resize(img.height, img.width);
    const Plane& R = img.planes[0];
    const Plane& G = img.planes[1];
    const Plane& B = img.planes[2];
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const double r = R(y, x), g = G(y, x), b = B(y, x);
            const double mx = std::max({r, g, b});
            const double mn = std::min({r, g, b});
            const double delta = mx - mn;
            double h = 0.0;
            if (delta > 0.0) {
                if (mx == r)
                    h = (g - b) / delta;
                else if (mx == g)
                    h = 2.0 + (b - r) / delta;
                else
                    h = 4.0 + (r - g) / delta;
                h /= 6.0;
                if (h < 0.0) h += 1.0;
                if (h >= 1.0) h -= 1.0;
            }
            out.hue(y, x) = h;
            out.saturation(y, x) = mx > 0.0 ? delta / mx : 0.0;
            out.value(y, x) = mx;
        }
    }
    return out;
}

Image grey_of(const Image& img) {
    if (img.channels() == 1) return img;
    if (img.channels() != 3) throw Error("grey_of: images have 1 or 3 channels");
    Image out;
    out.width = img.width;
    out.height = img.height;
    out.planes.push_back(img.planes[0].cwiseMax(img.planes[1]).cwiseMax(img.planes[2]));
    return out;
}

namespace {

std::vector<std::pair<int, int>> axis_partition(int dim, int n) {
    const int base = dim / n;
    const int extra = dim % n;
    std::vector<std::pair<int, int>> spans;
    int pos = 0;
    for (int i = 0; i < n; ++i) {
        const int len = base + (i >= n - extra ? 1 : 0);
        spans.emplace_back(pos, pos + len);
        pos += len;
    }
    return spans;
}

}  // namespace

std::vector<CellBounds> grid_partition(int width, int height, int rows, int cols) {
    if (rows < 1 || cols < 1) throw Error("grid rows and cols must be at least 1");
    if (rows > height || cols > width)
        throw Error("grid " + std::to_string(rows) + "x" + std::to_string(cols) + " exceeds image " +
                    std::to_string(width) + "x" + std::to_string(height));
    const auto xs = axis_partition(width, cols);
    const auto ys = axis_partition(height, rows);
    std::vector<CellBounds> cells;
    cells.reserve(static_cast<std::size_t>(rows * cols));
    for (const auto& [y0, y1] : ys)
        for (const auto& [x0, x1] : xs) cells.push_back({x0, y0, x1, y1, -1});
    return cells;
}

std::vector<CellBounds> pyramid_cells(int width, int height, int max_level) {
    if (max_level < 0 || max_level > 2) throw Error("unsupported pyramid level " + std::to_string(max_level));
    std::vector<CellBounds> cells;
    for (int level = 0; level <= max_level; ++level) {
        const int n = 1 << level;
        for (auto c : grid_partition(width, height, n, n)) {
            c.level = level;
            cells.push_back(c);
        }
    }
    return cells;
}

Half half_of(int y, int height) { return y < height / 2 ? Half::Upper : Half::Lower; }

Half half_of_cell(const CellBounds& cell, int height) { return cell.y1 <= height / 2 ? Half::Upper : Half::Lower; }

}  // namespace sceneret
