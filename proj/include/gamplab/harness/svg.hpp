#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gamplab/io.hpp"

namespace gamplab::harness {

/// One cell of a rows x cols grid plot.
struct GridCell {
  std::string fill;   // CSS color
  std::string label;  // short text drawn in the cell
};

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

/// Static grid plot. Row 0 is drawn at the bottom.
inline std::string grid_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                            const std::vector<std::string>& x_ticks, const std::vector<std::string>& y_ticks,
                            const std::vector<std::vector<GridCell>>& cells, const std::vector<std::string>& legend) {
  const int cw = 64, ch = 36, left = 90, top = 50, bottom = 70;
  const int cols = static_cast<int>(x_ticks.size()), rows = static_cast<int>(y_ticks.size());
  const int width = left + cols * cw + 30;
  const int height = top + rows * ch + bottom + 18 * static_cast<int>(legend.size());
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << xml_escape(title)
     << "</text>\n";
  for (int r = 0; r < rows; ++r) {
    const int y = top + (rows - 1 - r) * ch;
    os << "<text x=\"" << left - 6 << "\" y=\"" << y + ch / 2 + 4 << "\" text-anchor=\"end\">" << xml_escape(y_ticks[r])
       << "</text>\n";
    for (int c = 0; c < cols; ++c) {
      const int x = left + c * cw;
      const auto& cell = cells[r][c];
      os << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cw << "\" height=\"" << ch << "\" fill=\""
         << cell.fill << "\" stroke=\"white\"/>\n";
      if (!cell.label.empty())
        os << "<text x=\"" << x + cw / 2 << "\" y=\"" << y + ch / 2 + 4 << "\" text-anchor=\"middle\">"
           << xml_escape(cell.label) << "</text>\n";
    }
  }
  const int axis_y = top + rows * ch;
  for (int c = 0; c < cols; ++c)
    os << "<text x=\"" << left + c * cw + cw / 2 << "\" y=\"" << axis_y + 16 << "\" text-anchor=\"middle\">"
       << xml_escape(x_ticks[c]) << "</text>\n";
  os << "<text x=\"" << left + cols * cw / 2 << "\" y=\"" << axis_y + 36 << "\" text-anchor=\"middle\">"
     << xml_escape(x_label) << "</text>\n";
  os << "<text x=\"16\" y=\"" << top + rows * ch / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << top + rows * ch / 2 << ")\">" << xml_escape(y_label) << "</text>\n";
  for (std::size_t k = 0; k < legend.size(); ++k)
    os << "<text x=\"" << left << "\" y=\"" << axis_y + 56 + 18 * static_cast<int>(k) << "\">" << xml_escape(legend[k])
       << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os << text;
}

}  // namespace gamplab::harness
