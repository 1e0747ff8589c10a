const int CAP = 16;
int table[8];
int scratch_buf[16];

int sum_upto(int n) {
  int s = 0;
  int i;
  for (i = 0; i <= n; i = i + 1) {
    s = s + table[i];
  }
  return s;
}

int copy_prefix(int *dst, int *src, int len) {
  int k = 0;
  while (k < len) {
    dst[k] = src[k];
    k = k + 1;
  }
  return k;
}

int last_of(int *a, int n) {
  if (n > 0) {
    return a[n - 1];
  }
  return 0;
}

int clamp_read(int i) {
  if (i >= 0 && i < CAP) {
    return scratch_buf[i];
  }
  return -1;
}

int zero_fill() {
  int i;
  for (i = 0; i < 8; i = i + 1) {
    table[i] = 0;
  }
  return 0;
}
