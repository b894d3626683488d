#pragma once

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace iontrap {

// Minimal CSV writer; every numeric column carries a unit-suffixed header.
class CsvWriter {
public:
    explicit CsvWriter(std::ostream& os, const std::vector<std::string>& header)
        : os_(os) {
        for (std::size_t i = 0; i < header.size(); ++i)
            os_ << (i ? "," : "") << header[i];
        os_ << "\n";
    }

    template <typename... Ts>
    void row(Ts... vals) {
        bool first = true;
        ((os_ << (first ? "" : ","), first = false, write(vals)), ...);
        os_ << "\n";
    }

private:
    void write(double v) {
        std::ostringstream tmp;
        tmp << std::setprecision(12) << v;
        os_ << tmp.str();
    }
    void write(int v) { os_ << v; }
    void write(const std::string& v) { os_ << v; }
    std::ostream& os_;
};

} // namespace iontrap
