/* software netlist */
extern unsigned long long nondet(void);
extern void assume(_Bool cond);
extern void assert(_Bool cond);

struct state_elements_uart_top__tx {
  unsigned char sh;
  unsigned char cnt;
  _Bool busy;
};
struct state_elements_uart_top__rx {
  unsigned char data;
  _Bool full;
  unsigned char sh;
  unsigned char cnt;
  _Bool busy;
};
struct state_elements_uart_top {
  unsigned char dat_o;
  _Bool ack_o;
  _Bool loop;
  struct state_elements_uart_top__tx tx;
  struct state_elements_uart_top__rx rx;
};
struct state_elements_uart_top u1;

/* combinational signals and primary inputs */
static _Bool acc;
static unsigned char adr_i;
static _Bool clear;
static _Bool cyc_i;
static unsigned char dat_i;
static _Bool irq_o;
static _Bool load;
static _Bool rd;
static _Bool rst_i;
static _Bool rx__clear;
static _Bool rx__line;
static _Bool rx__rst;
static unsigned char rx_data;
static _Bool rx_full;
static _Bool rx_i;
static _Bool rx_line;
static _Bool stb_i;
static unsigned char tx__din;
static _Bool tx__empty;
static _Bool tx__line;
static _Bool tx__load;
static _Bool tx__rst;
static _Bool tx_empty;
static _Bool tx_line;
static _Bool we_i;
static _Bool wr;

/* comb:uart_top,uart_top.rx,uart_top.tx */
void uart_top_comb(_Bool loop_v, unsigned char rx__data_v, _Bool rx__full_v, _Bool tx__busy_v, unsigned char tx__sh_v) {
  acc = (_Bool)(nondet() & 0x1u);
  wr = (_Bool)(nondet() & 0x1u);
  rd = (_Bool)(nondet() & 0x1u);
  load = (_Bool)(nondet() & 0x1u);
  clear = (_Bool)(nondet() & 0x1u);
  rx_line = (_Bool)(nondet() & 0x1u);
  irq_o = (_Bool)(nondet() & 0x1u);
  tx__rst = (_Bool)(nondet() & 0x1u);
  tx__load = (_Bool)(nondet() & 0x1u);
  tx__din = (unsigned char)(nondet() & 0xfu);
  tx_line = (_Bool)(nondet() & 0x1u);
  tx_empty = (_Bool)(nondet() & 0x1u);
  rx__rst = (_Bool)(nondet() & 0x1u);
  rx__line = (_Bool)(nondet() & 0x1u);
  rx__clear = (_Bool)(nondet() & 0x1u);
  rx_data = (unsigned char)(nondet() & 0xfu);
  rx_full = (_Bool)(nondet() & 0x1u);
  tx__line = (_Bool)(nondet() & 0x1u);
  tx__empty = (_Bool)(nondet() & 0x1u);
  assume((acc == (cyc_i & stb_i)) && (wr == (acc & we_i)) && (rd == (acc & (!we_i))) && (load == (wr & (adr_i == 0))) && (clear == (rd & (adr_i == 0))) && (rx_line == (loop_v ? tx_line : rx_i)) && (irq_o == (rx_full | tx_empty)) && (tx__rst == rst_i) && (tx__load == load) && (tx__din == dat_i) && (tx_line == tx__line) && (tx_empty == tx__empty) && (rx__rst == rst_i) && (rx__line == rx_line) && (rx__clear == clear) && (rx_data == rx__data_v) && (rx_full == rx__full_v) && (tx__line == (tx__busy_v ? ((tx__sh_v) & 0x1u) : 1)) && (tx__empty == (!tx__busy_v)));
}

void initial_block(void) {
  u1.dat_o = 0;
  u1.ack_o = 0;
  u1.loop = 0;
  u1.tx.sh = 0;
  u1.tx.cnt = 0;
  u1.tx.busy = 0;
  u1.rx.data = 0;
  u1.rx.full = 0;
  u1.rx.sh = 0;
  u1.rx.cnt = 0;
  u1.rx.busy = 0;
  rst_i = 0;
  adr_i = 0;
  dat_i = 0;
  we_i = 0;
  stb_i = 0;
  cyc_i = 0;
  rx_i = 0;
  uart_top_comb(u1.loop, u1.rx.data, u1.rx.full, u1.tx.busy, u1.tx.sh);
}

void uart_top(_Bool rst_i_in, unsigned char adr_i_in, unsigned char dat_i_in, _Bool we_i_in, _Bool stb_i_in, _Bool cyc_i_in, _Bool rx_i_in) {
  rst_i = rst_i_in;
  adr_i = adr_i_in;
  dat_i = dat_i_in;
  we_i = we_i_in;
  stb_i = stb_i_in;
  cyc_i = cyc_i_in;
  rx_i = rx_i_in;
  _Bool loop_old = u1.loop;
  unsigned char tx__sh_old = u1.tx.sh;
  unsigned char tx__cnt_old = u1.tx.cnt;
  _Bool tx__busy_old = u1.tx.busy;
  unsigned char rx__data_old = u1.rx.data;
  _Bool rx__full_old = u1.rx.full;
  unsigned char rx__sh_old = u1.rx.sh;
  unsigned char rx__cnt_old = u1.rx.cnt;
  _Bool rx__busy_old = u1.rx.busy;
  uart_top_comb(loop_old, u1.rx.data, u1.rx.full, tx__busy_old, tx__sh_old);
  if (rst_i) {
    u1.loop = 0;
    u1.ack_o = 0;
    u1.dat_o = 0;
  } else {
    u1.ack_o = acc;
    if ((wr & (adr_i == 2))) {
      u1.loop = ((dat_i) & 0x1u);
    }
    if (rd) {
      if ((adr_i == 0)) {
        u1.dat_o = rx_data;
      } else {
        if ((adr_i == 1)) {
          u1.dat_o = ((rx_full << 1) | tx_empty);
        } else {
          u1.dat_o = 0;
        }
      }
    }
  }
  if (tx__rst) {
    u1.tx.busy = 0;
    u1.tx.cnt = 0;
    u1.tx.sh = 0;
  } else {
    if ((!tx__busy_old)) {
      if (tx__load) {
        u1.tx.sh = ((tx__din << 1) | 0);
        u1.tx.cnt = 5;
        u1.tx.busy = 1;
      }
    } else {
      u1.tx.sh = ((1 << 4) | (((tx__sh_old >> 1)) & 0xfu));
      u1.tx.cnt = ((tx__cnt_old - 1) & 0xfu);
      if ((tx__cnt_old == 1)) {
        u1.tx.busy = 0;
      }
    }
  }
  if (rx__rst) {
    u1.rx.busy = 0;
    u1.rx.cnt = 0;
    u1.rx.sh = 0;
    u1.rx.data = 0;
    u1.rx.full = 0;
  } else {
    if (rx__clear) {
      u1.rx.full = 0;
    }
    if ((!rx__busy_old)) {
      if ((!rx__line)) {
        u1.rx.busy = 1;
        u1.rx.cnt = 4;
      }
    } else {
      u1.rx.sh = ((rx__line << 3) | (((rx__sh_old >> 1)) & 0x7u));
      u1.rx.cnt = ((rx__cnt_old - 1) & 0xfu);
      if ((rx__cnt_old == 1)) {
        u1.rx.busy = 0;
        u1.rx.data = ((rx__line << 3) | (((rx__sh_old >> 1)) & 0x7u));
        u1.rx.full = 1;
      }
    }
  }
  uart_top_comb(u1.loop, u1.rx.data, u1.rx.full, u1.tx.busy, u1.tx.sh);
}

int main(void) {
  initial_block();
  _Bool rst_i_nd;
  unsigned char adr_i_nd;
  unsigned char dat_i_nd;
  _Bool we_i_nd;
  _Bool stb_i_nd;
  _Bool cyc_i_nd;
  _Bool rx_i_nd;
  while (1) {
    rst_i_nd = (_Bool)(nondet() & 0x1u); /* nondeterministic input */
    adr_i_nd = (unsigned char)(nondet() & 0x3u); /* nondeterministic input */
    dat_i_nd = (unsigned char)(nondet() & 0xfu); /* nondeterministic input */
    we_i_nd = (_Bool)(nondet() & 0x1u); /* nondeterministic input */
    stb_i_nd = (_Bool)(nondet() & 0x1u); /* nondeterministic input */
    cyc_i_nd = (_Bool)(nondet() & 0x1u); /* nondeterministic input */
    rx_i_nd = (_Bool)(nondet() & 0x1u); /* nondeterministic input */
    uart_top(rst_i_nd, adr_i_nd, dat_i_nd, we_i_nd, stb_i_nd, cyc_i_nd, rx_i_nd);
  }
  return 0;
}
