#pragma once

// Behavioral models of the node's sensors: ADXL362 accelerometer (SPI
// register map), LMT85 analog temperature sensor, 0.5-4.5 V ratiometric
// pressure transducer, and the MCU ADC that samples the analog outputs.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace railmon {

namespace adxl362 {

// SPI command bytes.
inline constexpr std::uint8_t kCmdWrite = 0x0A;
inline constexpr std::uint8_t kCmdRead = 0x0B;

// Register addresses.
inline constexpr std::uint8_t kDevIdAd = 0x00;
inline constexpr std::uint8_t kDevIdMst = 0x01;
inline constexpr std::uint8_t kPartId = 0x02;
inline constexpr std::uint8_t kRevId = 0x03;
inline constexpr std::uint8_t kXData8 = 0x08;
inline constexpr std::uint8_t kYData8 = 0x09;
inline constexpr std::uint8_t kZData8 = 0x0A;
inline constexpr std::uint8_t kStatus = 0x0B;
inline constexpr std::uint8_t kFifoEntriesL = 0x0C;
inline constexpr std::uint8_t kFifoEntriesH = 0x0D;
inline constexpr std::uint8_t kXDataL = 0x0E;
inline constexpr std::uint8_t kXDataH = 0x0F;
inline constexpr std::uint8_t kYDataL = 0x10;
inline constexpr std::uint8_t kYDataH = 0x11;
inline constexpr std::uint8_t kZDataL = 0x12;
inline constexpr std::uint8_t kZDataH = 0x13;
inline constexpr std::uint8_t kTempL = 0x14;
inline constexpr std::uint8_t kTempH = 0x15;
inline constexpr std::uint8_t kSoftReset = 0x1F;
inline constexpr std::uint8_t kFifoControl = 0x28;
inline constexpr std::uint8_t kFifoSamples = 0x29;
inline constexpr std::uint8_t kIntMap1 = 0x2A;
inline constexpr std::uint8_t kIntMap2 = 0x2B;
inline constexpr std::uint8_t kFilterCtl = 0x2C;
inline constexpr std::uint8_t kPowerCtl = 0x2D;
inline constexpr std::uint8_t kSelfTest = 0x2E;

inline constexpr std::uint8_t kDevIdAdValue = 0xAD;
inline constexpr std::uint8_t kSoftResetKey = 0x52;  // 'R'

// FILTER_CTL: RANGE[7:6] HALF_BW[4] EXT_SAMPLE[3] ODR[2:0]
inline constexpr std::uint8_t kFilterCtlReset = 0x13;  // +-2 g, half BW, 100 Hz
// POWER_CTL MEASURE[1:0]
inline constexpr std::uint8_t kMeasureMode = 0x02;

// SPI mode 0 at SYSCLK / 8.
inline constexpr std::uint32_t kSysClockHz = 72'000'000;
inline constexpr std::uint32_t kSpiClockHz = kSysClockHz / 8;
inline constexpr std::uint32_t kSpiMaxClockHz = 10'000'000;
inline constexpr int kSpiCpol = 0;
inline constexpr int kSpiCpha = 0;
static_assert(kSpiClockHz <= kSpiMaxClockHz);

// Data registers hold 12-bit sign-extended samples.
inline constexpr std::int16_t kMinCount = -2048;
inline constexpr std::int16_t kMaxCount = 2047;

}  // namespace adxl362

enum class AccelMode { Standby, Measurement };

struct RawAccel {
    std::int16_t x = 0;
    std::int16_t y = 0;
    std::int16_t z = 0;

    friend bool operator==(const RawAccel&, const RawAccel&) = default;
};

class Adxl362Model {
public:
    Adxl362Model();

    /// Full-duplex SPI transfer. For reads, `payload.size()` dummy bytes are
    /// clocked and the same number of register bytes is returned starting at
    /// `address` (auto-increment). For writes, payload bytes are written to
    /// consecutive registers and an empty vector is returned.
    std::vector<std::uint8_t> spi_transaction(std::uint8_t command, std::uint8_t address,
                                              std::span<const std::uint8_t> payload);

    std::uint8_t read_register(std::uint8_t address);
    void write_register(std::uint8_t address, std::uint8_t value);

    /// Soft reset, FIFO off, FILTER_CTL = reset value (100 Hz), measurement on.
    void run_init_sequence();

    /// Applies an acceleration stimulus. Data registers latch it only while
    /// measuring.
    void set_stimulus_g(double x_g, double y_g, double z_g);

    /// Burst-reads XDATA_L..ZDATA_H. Throws Error{NotMeasuring} in standby.
    RawAccel read_xyz();

    AccelMode mode() const;
    double odr_hz() const;
    /// milli-g per LSB for the current range setting.
    double scale_mg_per_lsb() const;

private:
    void reset();
    void latch();

    std::array<std::uint8_t, 0x30> regs_{};
    std::array<double, 3> stimulus_g_{};
};

inline constexpr std::int32_t raw_to_mg(std::int16_t raw, double scale_mg_per_lsb) {
    return static_cast<std::int32_t>(raw * scale_mg_per_lsb);
}

struct Lmt85Model {
    double v0_volts = 1.8639;
    double slope_v_per_c = -0.0082;
    double min_c = -50.0;
    double max_c = 150.0;

    /// Throws Error{RangeError} outside [min_c, max_c].
    double voltage(double temp_c) const;
    /// Algebraic inverse of voltage(); not range-checked.
    double temperature(double volts) const;
};

struct PressureSensorModel {
    double v_min = 0.5;
    double v_max = 4.5;
    double full_scale_kpa = 100.0;

    /// Throws Error{RangeError} outside [0, full_scale_kpa].
    double voltage(double kpa) const;
    /// Input is clamped to [v_min, v_max] before inversion.
    double kpa(double volts) const;
};

struct AdcModel {
    int resolution_bits = 12;
    double vref_volts = 3.3;

    std::uint32_t max_code() const { return (1u << resolution_bits) - 1u; }
    /// round(v / vref * max_code) clamped to [0, max_code].
    std::uint32_t sample(double volts) const;
    double code_to_volts(std::uint32_t code) const;
    double lsb_volts() const { return vref_volts / max_code(); }
};

}  // namespace railmon
