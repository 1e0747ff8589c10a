struct node {
  int val;
  struct node *next;
};

int second_val(struct node *head) {
  struct node *n = head->next;
  return n->val;
}

int *find(int *a, int n, int key) {
  int i;
  for (i = 0; i < n; i = i + 1) {
    if (a[i] == key) return &a[i];
  }
  return null;
}

int use_find(int *a, int n) {
  int *q = find(a, n, 7);
  return *q;
}

int first_or_zero(int *p, int use) {
  int *q = null;
  if (use > 0) q = p;
  return *q;
}

int val_or_zero(struct node *p) {
  if (p != null) {
    return p->val;
  }
  return 0;
}

int list_len(struct node *p) {
  int c = 0;
  if (p == null) {
    return -1;
  }
  while (p != null) {
    c = c + 1;
    p = p->next;
  }
  return c;
}
