#include "railmon/sensor_models.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "railmon/error.hpp"

namespace railmon {

using namespace adxl362;

namespace {

bool is_mapped(std::uint8_t a) {
    return a <= kRevId || (a >= kXData8 && a <= kTempH) || a == kSoftReset || (a >= 0x20 && a <= kSelfTest);
}

bool is_writable(std::uint8_t a) {
    return a == kSoftReset || (a >= 0x20 && a <= kSelfTest);
}

void require_mapped(std::uint8_t a) {
    if (!is_mapped(a)) {
        throw Error(ErrorCode::UnknownRegister, fmt::format("ADXL362 register 0x{:02X}", a));
    }
}

}  // namespace

Adxl362Model::Adxl362Model() { reset(); }

void Adxl362Model::reset() {
    regs_.fill(0);
    regs_[kDevIdAd] = kDevIdAdValue;
    regs_[kDevIdMst] = 0x1D;
    regs_[kPartId] = 0xF2;
    regs_[kRevId] = 0x02;
    regs_[kFilterCtl] = kFilterCtlReset;
}

std::uint8_t Adxl362Model::read_register(std::uint8_t address) {
    require_mapped(address);
    if (address == kSoftReset) return 0;
    return regs_[address];
}

void Adxl362Model::write_register(std::uint8_t address, std::uint8_t value) {
    require_mapped(address);
    if (!is_writable(address)) return;  // read-only registers ignore writes
    if (address == kSoftReset) {
        if (value == kSoftResetKey) reset();
        return;
    }
    if (address == kFifoControl) value &= 0x0F;  // upper bits unimplemented
    regs_[address] = value;
    if (address == kPowerCtl || address == kFilterCtl) latch();
}

std::vector<std::uint8_t> Adxl362Model::spi_transaction(std::uint8_t command, std::uint8_t address,
                                                        std::span<const std::uint8_t> payload) {
    std::vector<std::uint8_t> out;
    switch (command) {
        case kCmdRead:
            out.reserve(payload.size());
            for (std::size_t i = 0; i < payload.size(); ++i) {
                out.push_back(read_register(static_cast<std::uint8_t>(address + i)));
            }
            break;
        case kCmdWrite:
            for (std::size_t i = 0; i < payload.size(); ++i) {
                write_register(static_cast<std::uint8_t>(address + i), payload[i]);
            }
            break;
        default:
            throw Error(ErrorCode::UnknownCommand, fmt::format("ADXL362 SPI command 0x{:02X}", command));
    }
    return out;
}

void Adxl362Model::run_init_sequence() {
    const std::uint8_t reset_key[] = {kSoftResetKey};
    spi_transaction(kCmdWrite, kSoftReset, reset_key);
    const std::uint8_t fifo_off[] = {0x00};
    spi_transaction(kCmdWrite, kFifoControl, fifo_off);
    const std::uint8_t filter[] = {kFilterCtlReset};
    spi_transaction(kCmdWrite, kFilterCtl, filter);
    const std::uint8_t measure[] = {kMeasureMode};
    spi_transaction(kCmdWrite, kPowerCtl, measure);
}

AccelMode Adxl362Model::mode() const {
    return (regs_[kPowerCtl] & 0x03) == kMeasureMode ? AccelMode::Measurement : AccelMode::Standby;
}

double Adxl362Model::odr_hz() const {
    static constexpr double kOdr[] = {12.5, 25.0, 50.0, 100.0, 200.0, 400.0, 400.0, 400.0};
    return kOdr[regs_[kFilterCtl] & 0x07];
}

double Adxl362Model::scale_mg_per_lsb() const {
    switch (regs_[kFilterCtl] >> 6) {
        case 0: return 1.0;
        case 1: return 2.0;
        default: return 4.0;
    }
}

void Adxl362Model::set_stimulus_g(double x_g, double y_g, double z_g) {
    stimulus_g_ = {x_g, y_g, z_g};
    latch();
}

void Adxl362Model::latch() {
    if (mode() != AccelMode::Measurement) return;
    const double scale = scale_mg_per_lsb();
    for (std::size_t axis = 0; axis < 3; ++axis) {
        const double counts = std::round(stimulus_g_[axis] * 1000.0 / scale);
        const auto clamped = static_cast<std::int16_t>(std::clamp(counts, double{kMinCount}, double{kMaxCount}));
        const auto bits = static_cast<std::uint16_t>(clamped);
        const auto lo = static_cast<std::size_t>(kXDataL + 2 * axis);
        regs_[lo] = static_cast<std::uint8_t>(bits & 0xFF);
        regs_[lo + 1] = static_cast<std::uint8_t>(bits >> 8);
        regs_[kXData8 + axis] = static_cast<std::uint8_t>((clamped >> 4) & 0xFF);
    }
    regs_[kStatus] |= 0x01;  // DATA_READY
}

RawAccel Adxl362Model::read_xyz() {
    if (mode() != AccelMode::Measurement) {
        throw Error(ErrorCode::NotMeasuring, "ADXL362 is in standby");
    }
    const std::uint8_t dummy[6] = {};
    const auto b = spi_transaction(kCmdRead, kXDataL, dummy);
    auto word = [&](std::size_t i) {
        return static_cast<std::int16_t>(static_cast<std::uint16_t>(b[i] | (b[i + 1] << 8)));
    };
    regs_[kStatus] &= static_cast<std::uint8_t>(~0x01);
    return {word(0), word(2), word(4)};
}

double Lmt85Model::voltage(double temp_c) const {
    if (!(temp_c >= min_c && temp_c <= max_c)) {
        throw Error(ErrorCode::RangeError, fmt::format("temperature {} degC outside [{}, {}]", temp_c, min_c, max_c));
    }
    return v0_volts + slope_v_per_c * temp_c;
}

double Lmt85Model::temperature(double volts) const {
    return (volts - v0_volts) / slope_v_per_c;
}

double PressureSensorModel::voltage(double kpa_in) const {
    if (!(kpa_in >= 0.0 && kpa_in <= full_scale_kpa)) {
        throw Error(ErrorCode::RangeError, fmt::format("pressure {} kPa outside [0, {}]", kpa_in, full_scale_kpa));
    }
    return v_min + (kpa_in / full_scale_kpa) * (v_max - v_min);
}

double PressureSensorModel::kpa(double volts) const {
    const double v = std::clamp(volts, v_min, v_max);
    return (v - v_min) / (v_max - v_min) * full_scale_kpa;
}

std::uint32_t AdcModel::sample(double volts) const {
    const double full = static_cast<double>(max_code());
    const double code = std::round(volts / vref_volts * full);
    if (!(code > 0.0)) return 0;
    if (code >= full) return max_code();
    return static_cast<std::uint32_t>(code);
}

double AdcModel::code_to_volts(std::uint32_t code) const {
    return static_cast<double>(std::min(code, max_code())) * vref_volts / static_cast<double>(max_code());
}

}  // namespace railmon
